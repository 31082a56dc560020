#include "rollcast/model_build.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rollcast {

namespace {

struct PeriodVars {
    std::vector<int> x, y, inv, back;  // per product
    int overtime = -1;
};

constexpr double kIntTol = 1e-6;

void check_state(const MSlagInstance& inst, const SystemState& state) {
    const auto J = static_cast<std::size_t>(inst.products);
    if (state.inventory.size() != J || state.backlog.size() != J || state.pipeline.size() != J)
        throw DimensionMismatch("state dimension does not match instance products");
    for (std::size_t j = 0; j < J; ++j)
        if (state.inventory[j] < 0 || state.backlog[j] < 0 || state.pipeline[j] < 0)
            throw ModelError("negative entries in system state");
}

// Linking bound for (global period g, product j): the instance bound
// tightened by the total demand production could still serve. Production
// beyond that only accumulates inventory, so capping it preserves the
// optimum while strengthening the relaxation.
double linking_bound(const MSlagInstance& inst, int g, int j, double remaining_demand) {
    double m = inst.big_m[g][j];
    if (!std::isfinite(m)) return remaining_demand;
    return std::min(m, remaining_demand);
}

// Variables and per-period constraints shared by all builders. `demand`
// indexes model periods; g0 is the global period of model period 0; weight
// scales the objective (1/|S| for scenario blocks); prev links model period
// `first` to existing variables (or the realized state when prev == nullptr).
class MSlagBlockBuilder {
public:
    MSlagBlockBuilder(MILPModel& model, const MSlagInstance& inst, const SystemState& state)
        : model_(model), inst_(inst), state_(state) {}

    // Remaining demand per product from model period `from` onward, used
    // only for the infinite-capacity linking fallback.
    std::vector<double> remaining_demand(const std::vector<std::vector<double>>& demand) const {
        std::vector<double> r(inst_.products, 0.0);
        for (const auto& row : demand)
            for (int j = 0; j < inst_.products; ++j) r[j] += row[j];
        for (int j = 0; j < inst_.products; ++j)
            r[j] += state_.backlog[j];
        return r;
    }

    PeriodVars add_period(int k, int g, int scenario, double weight,
                          const std::vector<double>& remaining) {
        const int J = inst_.products;
        PeriodVars pv;
        pv.x.resize(J);
        pv.y.resize(J);
        pv.inv.resize(J);
        pv.back.resize(J);
        const bool final_global = (g == inst_.periods - 1);
        std::string suffix = "_" + std::to_string(k) + (scenario >= 0 ? "_s" + std::to_string(scenario) : "");

        for (int j = 0; j < J; ++j) {
            std::string pj = suffix + "_" + std::to_string(j);
            Variable x{"x" + pj, 0.0, final_global ? 0.0 : kInf, VarType::Continuous,
                       VarRole::Production, k, j, scenario};
            pv.x[j] = model_.add_variable(x);
            Variable y{"y" + pj, 0.0, 1.0, VarType::Binary, VarRole::Setup, k, j, scenario};
            pv.y[j] = model_.add_variable(y);
            model_.set_objective(pv.y[j], weight * inst_.setup_cost[g][j]);
            Variable iv{"ip" + pj, 0.0, inst_.inv_capacity[g][j], VarType::Continuous,
                        VarRole::Inventory, k, j, scenario};
            pv.inv[j] = model_.add_variable(iv);
            model_.set_objective(pv.inv[j], weight * inst_.holding_cost[g][j]);
            Variable bk{"im" + pj, 0.0, kInf, VarType::Continuous, VarRole::Backlog, k, j,
                        scenario};
            pv.back[j] = model_.add_variable(bk);
            model_.set_objective(pv.back[j], weight * inst_.backlog_cost[g][j]);
        }
        Variable o{"o" + suffix, 0.0, inst_.overtime_bound[g], VarType::Continuous,
                   VarRole::Overtime, k, -1, scenario};
        pv.overtime = model_.add_variable(o);
        model_.set_objective(pv.overtime, weight * inst_.overtime_cost[g]);

        // Overtime measurement: sum_j (TS y + TB x) - o <= C_g.
        Constraint ot;
        ot.rel = Rel::LE;
        ot.rhs = inst_.capacity[g];
        for (int j = 0; j < J; ++j) {
            ot.coeffs.emplace_back(pv.y[j], inst_.setup_time[j]);
            ot.coeffs.emplace_back(pv.x[j], inst_.unit_time[j]);
        }
        ot.coeffs.emplace_back(pv.overtime, -1.0);
        model_.add_constraint(std::move(ot));

        for (int j = 0; j < J; ++j) {
            // Linking x <= M y.
            Constraint link;
            link.rel = Rel::LE;
            link.rhs = 0.0;
            link.coeffs.emplace_back(pv.x[j], 1.0);
            link.coeffs.emplace_back(pv.y[j], -linking_bound(inst_, g, j, remaining[j]));
            model_.add_constraint(std::move(link));

            // Next-period inventory headroom: i+ + x <= I_{g+1,j}.
            if (g + 1 < inst_.periods && std::isfinite(inst_.inv_capacity[g + 1][j])) {
                Constraint cap;
                cap.rel = Rel::LE;
                cap.rhs = inst_.inv_capacity[g + 1][j];
                cap.coeffs.emplace_back(pv.inv[j], 1.0);
                cap.coeffs.emplace_back(pv.x[j], 1.0);
                model_.add_constraint(std::move(cap));
            }
        }
        return pv;
    }

    // Valid inequalities along one scenario path. Demand over periods
    // k+1..m can only be met from inventory at k or production set up in
    // k..m-1 (possibly via cleared backlog); otherwise it is backlogged at
    // m. Tightens the relaxation without touching the variable set.
    void add_path_cuts(const std::vector<const PeriodVars*>& path,
                       const std::vector<std::vector<double>>& demand) {
        const int H = static_cast<int>(path.size());
        for (int j = 0; j < inst_.products; ++j) {
            // Windows anchored at the realized state: demand through m plus
            // standing backlog, net of stock on hand and the pipeline.
            double from_start = state_.backlog[j] - state_.inventory[j] - state_.pipeline[j];
            for (int m = 0; m < H; ++m) {
                from_start += demand[m][j];
                if (from_start <= 0.0 || m == 0) continue;
                Constraint cut;
                cut.rel = Rel::GE;
                cut.rhs = from_start;
                cut.coeffs.emplace_back(path[m]->back[j], 1.0);
                for (int p = 0; p < m; ++p)
                    cut.coeffs.emplace_back(path[p]->y[j], from_start);
                model_.add_constraint(std::move(cut));
            }
            for (int k = 0; k + 1 < H; ++k) {
                double window = 0.0;
                for (int m = k + 1; m < H; ++m) {
                    window += demand[m][j];
                    if (window <= 0.0) continue;
                    Constraint cut;
                    cut.rel = Rel::GE;
                    cut.rhs = window;
                    cut.coeffs.emplace_back(path[k]->inv[j], 1.0);
                    cut.coeffs.emplace_back(path[m]->back[j], 1.0);
                    for (int p = k; p < m; ++p)
                        cut.coeffs.emplace_back(path[p]->y[j], window);
                    model_.add_constraint(std::move(cut));
                }
            }
        }
    }

    // Flow balance i- - i+ + i+_prev - i-_prev + x_prev = D. prev == nullptr
    // wires the realized state in as constants.
    void add_flow(const PeriodVars& cur, const PeriodVars* prev, const std::vector<double>& demand) {
        for (int j = 0; j < inst_.products; ++j) {
            Constraint flow;
            flow.rel = Rel::EQ;
            flow.coeffs.emplace_back(cur.back[j], 1.0);
            flow.coeffs.emplace_back(cur.inv[j], -1.0);
            if (prev) {
                flow.coeffs.emplace_back(prev->inv[j], 1.0);
                flow.coeffs.emplace_back(prev->back[j], -1.0);
                flow.coeffs.emplace_back(prev->x[j], 1.0);
                flow.rhs = demand[j];
            } else {
                flow.rhs = demand[j] - state_.inventory[j] + state_.backlog[j] -
                           state_.pipeline[j];
            }
            model_.add_constraint(std::move(flow));
        }
    }

private:
    MILPModel& model_;
    const MSlagInstance& inst_;
    const SystemState& state_;
};

} // namespace

MILPModel build_deterministic(const MSlagInstance& inst, const SystemState& state,
                              const std::vector<double>& current_demand,
                              const Scenario& future) {
    if (!inst.valid_dims()) throw DimensionMismatch("instance dimensions inconsistent");
    check_state(inst, state);
    if (static_cast<int>(current_demand.size()) != inst.products)
        throw DimensionMismatch("current_demand size mismatch");
    if (future.periods() > 0 && future.products() != inst.products)
        throw DimensionMismatch("future scenario product mismatch");

    const int horizon = future.periods() + 1;  // model periods
    if (horizon > inst.periods) throw DimensionMismatch("look-ahead exceeds instance periods");
    const int g0 = inst.periods - horizon;

    MILPModel model;
    MSlagBlockBuilder b(model, inst, state);

    std::vector<std::vector<double>> all_demand{current_demand};
    for (const auto& row : future.demands) all_demand.push_back(row);
    auto rem = b.remaining_demand(all_demand);

    std::vector<PeriodVars> periods;
    for (int k = 0; k < horizon; ++k)
        periods.push_back(b.add_period(k, g0 + k, -1, 1.0, rem));
    for (int k = 0; k < horizon; ++k)
        b.add_flow(periods[k], k > 0 ? &periods[k - 1] : nullptr, all_demand[k]);

    std::vector<const PeriodVars*> path;
    for (const auto& pv : periods) path.push_back(&pv);
    b.add_path_cuts(path, all_demand);

    return model;
}

MILPModel build_two_stage(const MSlagInstance& inst, const SystemState& state,
                          const std::vector<double>& current_demand,
                          const ScenarioSet& scenarios) {
    if (scenarios.scenarios.empty()) throw DimensionMismatch("empty scenario set");
    if (!inst.valid_dims()) throw DimensionMismatch("instance dimensions inconsistent");
    check_state(inst, state);
    const int S = static_cast<int>(scenarios.scenarios.size());
    const int tail = scenarios.scenarios.front().periods();
    for (const auto& sc : scenarios.scenarios)
        if (sc.periods() != tail || (tail > 0 && sc.products() != inst.products))
            throw DimensionMismatch("scenario dimensions inconsistent");

    const int horizon = tail + 1;
    if (horizon > inst.periods) throw DimensionMismatch("look-ahead exceeds instance periods");
    const int g0 = inst.periods - horizon;
    const double w = 1.0 / S;

    MILPModel model;
    MSlagBlockBuilder b(model, inst, state);

    // Per-scenario remaining demand; the shared first period takes the
    // elementwise worst case over scenarios.
    std::vector<std::vector<double>> rem_s;
    std::vector<double> rem_first(inst.products, 0.0);
    for (const auto& sc : scenarios.scenarios) {
        std::vector<std::vector<double>> all{current_demand};
        for (const auto& row : sc.demands) all.push_back(row);
        rem_s.push_back(b.remaining_demand(all));
        for (int j = 0; j < inst.products; ++j)
            rem_first[j] = std::max(rem_first[j], rem_s.back()[j]);
    }

    PeriodVars first = b.add_period(0, g0, -1, 1.0, rem_first);
    b.add_flow(first, nullptr, current_demand);

    for (int s = 0; s < S; ++s) {
        const auto& sc = scenarios.scenarios[s];
        const PeriodVars* prev = &first;
        std::vector<PeriodVars> blocks;
        blocks.reserve(horizon - 1);
        for (int k = 1; k < horizon; ++k) {
            blocks.push_back(b.add_period(k, g0 + k, s, w, rem_s[s]));
            b.add_flow(blocks.back(), prev, sc.demands[k - 1]);
            prev = &blocks.back();
        }
        std::vector<const PeriodVars*> path{&first};
        std::vector<std::vector<double>> demand{current_demand};
        for (const auto& blk : blocks) path.push_back(&blk);
        for (const auto& row : sc.demands) demand.push_back(row);
        b.add_path_cuts(path, demand);
    }
    return model;
}

MILPModel build_perfect_information(const MSlagInstance& inst, const SystemState& init_state,
                                    const TruthScenario& truth) {
    if (truth.periods() != inst.periods || truth.products() != inst.products)
        throw DimensionMismatch("truth dimensions do not match instance");
    Scenario future;
    future.label = ScenarioLabel::Truth;
    future.demands.assign(truth.demands.begin() + 1, truth.demands.end());
    return build_deterministic(inst, init_state, truth.demands[0], future);
}

Decision extract_first_stage(const MILPModel& model, const MILPSolution& solution) {
    if (solution.status != MILPStatus::Optimal)
        throw NotOptimal("extract_first_stage: solution not optimal");

    int products = 0;
    for (const auto& v : model.variables())
        if (v.t == 0 && v.s == -1 && v.j >= 0) products = std::max(products, v.j + 1);

    Decision d;
    d.production.assign(products, 0.0);
    d.setup.assign(products, 0);
    d.inventory.assign(products, 0.0);
    d.backlog.assign(products, 0.0);

    const auto& vars = model.variables();
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const auto& v = vars[i];
        if (v.t != 0 || v.s != -1) continue;
        double val = solution.x[i];
        switch (v.role) {
            case VarRole::Production: d.production[v.j] = std::max(val, 0.0); break;
            case VarRole::Setup:
                if (val > 1.0 - kIntTol) d.setup[v.j] = 1;
                else if (val < kIntTol) d.setup[v.j] = 0;
                else throw NotOptimal("extract_first_stage: fractional setup variable");
                break;
            case VarRole::Inventory: d.inventory[v.j] = std::max(val, 0.0); break;
            case VarRole::Backlog: d.backlog[v.j] = std::max(val, 0.0); break;
            case VarRole::Overtime: d.overtime = std::max(val, 0.0); break;
            default: break;
        }
    }
    for (int j = 0; j < products; ++j) {
        if (d.setup[j] == 0 && d.production[j] != 0.0) {
            d.production[j] = 0.0;
            d.production_snapped = true;
        }
    }
    return d;
}

} // namespace rollcast
