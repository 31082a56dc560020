#include "rollcast/milp.hpp"

#include "milp_internal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace rollcast {

namespace {

constexpr double kIntTol = 1e-6;

struct Node {
    std::vector<double> lb, ub;
    double bound;        // LP lower bound on this subtree (own LP when x is set)
    std::int64_t order;  // insertion order, FIFO tie-break
    std::vector<double> x;  // own LP solution when solved eagerly at creation
};

struct NodeCompare {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
        return a.order > b.order;
    }
};

// Most fractional binary; ties go to the lowest variable index.
int pick_branching(const MILPModel& model, const std::vector<double>& x) {
    int best = -1;
    double best_frac = kIntTol;
    const auto& vars = model.variables();
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (vars[i].type != VarType::Binary) continue;
        double f = x[i] - std::floor(x[i]);
        double frac = std::min(f, 1.0 - f);
        if (frac > best_frac + 1e-12) {
            best_frac = frac;
            best = static_cast<int>(i);
        }
    }
    return best;
}

} // namespace

MILPSolution solve_milp(const MILPModel& model, const MILPOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    MILPSolution sol;
    sol.objective = kInf;
    sol.bound = -kInf;

    std::vector<double> lb0, ub0;
    for (const auto& v : model.variables()) {
        if (v.type == VarType::Binary) {
            lb0.push_back(std::max(v.lb, 0.0));
            ub0.push_back(std::min(v.ub, 1.0));
        } else {
            lb0.push_back(v.lb);
            ub0.push_back(v.ub);
        }
    }

    // Round-up heuristic for an initial incumbent: fix every binary that is
    // active in the root relaxation to 1, the rest to 0, and resolve. Gives
    // the search a pruning bound before the first dive completes.
    {
        LPSolution root = detail::solve_lp_bounded(model, lb0, ub0);
        if (root.status == LPStatus::Optimal) {
            std::vector<double> hlb = lb0, hub = ub0;
            for (std::size_t i = 0; i < hlb.size(); ++i) {
                if (model.variables()[i].type != VarType::Binary) continue;
                double v = root.x[i] > kIntTol ? 1.0 : 0.0;
                hlb[i] = std::max(hlb[i], v);
                hub[i] = std::min(hub[i], v);
                if (hlb[i] > hub[i]) hlb[i] = hub[i];
            }
            LPSolution h = detail::solve_lp_bounded(model, hlb, hub);
            if (h.status == LPStatus::Optimal) {
                sol.objective = h.objective;
                sol.x = h.x;
                for (std::size_t i = 0; i < sol.x.size(); ++i)
                    if (model.variables()[i].type == VarType::Binary)
                        sol.x[i] = std::round(sol.x[i]);
            }
        }
    }

    std::priority_queue<Node, std::vector<Node>, NodeCompare> pool;
    std::int64_t order = 0;
    Node dive{std::move(lb0), std::move(ub0), -kInf, order++};
    bool have_dive = true;

    // Warm-started dive LPs: a dive child differs from its just-solved
    // parent by one fixed binary, so the retained tableau re-optimizes in a
    // few dual pivots. Pool nodes and fallback cases solve cold.
    detail::WarmLp warm(model);
    int pending_fix_var = -1;
    double pending_fix_val = 0.0;

    auto open_bound = [&](bool include_dive) {
        double b = kInf;
        if (include_dive) b = dive.bound;
        if (!pool.empty()) b = std::min(b, pool.top().bound);
        return b;
    };

    auto stop_with = [&](MILPStatus status, bool dive_open) {
        sol.status = status;
        sol.bound = std::min(open_bound(dive_open), sol.objective);
        return sol;
    };

    while (have_dive || !pool.empty()) {
        bool have_lp = false;
        LPSolution lp;
        if (!have_dive) {
            dive = pool.top();
            pool.pop();
            pending_fix_var = -1;
            if (!dive.x.empty()) {  // LP already solved when the node was created
                lp.status = LPStatus::Optimal;
                lp.objective = dive.bound;
                lp.x = std::move(dive.x);
                have_lp = true;
            }
        }
        have_dive = false;

        // Gap closed: everything open is within abs_gap of the incumbent.
        if (dive.bound >= sol.objective - opts.abs_gap) {
            pending_fix_var = -1;
            continue;
        }

        if (sol.nodes >= opts.node_limit) return stop_with(MILPStatus::NodeLimit, true);
        if (elapsed() > opts.time_limit_sec) return stop_with(MILPStatus::TimeLimit, true);

        bool tableau_hot = false;
        if (!have_lp) {
            if (pending_fix_var >= 0 && warm.refix(pending_fix_var, pending_fix_val, &lp)) {
                tableau_hot = lp.status == LPStatus::Optimal;
            } else {
                lp = warm.solve(dive.lb, dive.ub);
                tableau_hot = lp.status == LPStatus::Optimal;
            }
            ++sol.nodes;
        }
        pending_fix_var = -1;
        if (lp.status == LPStatus::Infeasible) continue;
        if (lp.status == LPStatus::Unbounded)
            throw std::runtime_error("solve_milp: unbounded relaxation");
        if (lp.objective >= sol.objective - opts.abs_gap) continue;

        int branch = pick_branching(model, lp.x);
        if (branch < 0) {
            sol.objective = lp.objective;
            sol.x = lp.x;
            for (std::size_t i = 0; i < sol.x.size(); ++i)
                if (model.variables()[i].type == VarType::Binary) sol.x[i] = std::round(sol.x[i]);
            continue;
        }

        // Children: dive toward the rounded LP value, pool the sibling. With
        // a hot tableau the sibling's LP is solved eagerly on a scratch copy,
        // giving the pool node its own (tighter) bound; hopeless siblings are
        // pruned before they are ever queued.
        double dive_val = lp.x[branch] >= 0.5 ? 1.0 : 0.0;
        Node sib{dive.lb, dive.ub, lp.objective, order++};
        Node child{std::move(dive.lb), std::move(dive.ub), lp.objective, order++};
        if (dive_val >= 0.5) {
            child.lb[branch] = 1.0;
            sib.ub[branch] = 0.0;
        } else {
            child.ub[branch] = 0.0;
            sib.lb[branch] = 1.0;
        }
        bool queue_sibling = true;
        if (tableau_hot && sol.nodes < opts.node_limit) {
            LPSolution sib_lp;
            if (warm.refix_sibling(branch, 1.0 - dive_val, &sib_lp) &&
                sib_lp.status == LPStatus::Optimal) {
                ++sol.nodes;
                if (sib_lp.objective >= sol.objective - opts.abs_gap) {
                    queue_sibling = false;
                } else {
                    sib.bound = sib_lp.objective;
                    sib.x = std::move(sib_lp.x);
                }
            }
        }
        if (queue_sibling) pool.push(std::move(sib));
        dive = std::move(child);
        pending_fix_var = tableau_hot ? branch : -1;  // stale tableau after a pool pop
        pending_fix_val = dive_val;
        have_dive = true;
    }

    if (!std::isfinite(sol.objective)) {
        sol.status = MILPStatus::Infeasible;
        sol.objective = 0.0;
        sol.bound = 0.0;
        return sol;
    }
    sol.status = MILPStatus::Optimal;
    sol.bound = sol.objective;
    return sol;
}

} // namespace rollcast
