#include "rollcast/rolling.hpp"

#include "rollcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rollcast {

std::vector<std::vector<int>> partition_periods(const std::vector<int>& periods, int n_stages) {
    if (n_stages < 1 || static_cast<int>(periods.size()) < n_stages)
        throw ModelError("partition_periods: need at least n_stages periods");

    std::vector<std::vector<int>> parts;
    if (n_stages == 1) {
        parts.push_back(periods);
        return parts;
    }
    parts.push_back({periods.front()});
    const int rest = static_cast<int>(periods.size()) - 1;
    const int groups = n_stages - 1;
    const int base = rest / groups, extra = rest % groups;
    std::size_t at = 1;
    for (int g = 0; g < groups; ++g) {
        int len = base + (g < extra ? 1 : 0);
        parts.emplace_back(periods.begin() + at, periods.begin() + at + len);
        at += len;
    }
    return parts;
}

std::pair<SystemState, double> advance_state(const MSlagInstance& inst, int t,
                                             const SystemState& state, const Decision& decision,
                                             const std::vector<double>& realized_demand) {
    const int J = inst.products;
    SystemState next = SystemState::zero(J);
    double cost = inst.overtime_cost[t] * decision.overtime;
    for (int j = 0; j < J; ++j) {
        double net = state.inventory[j] - state.backlog[j] + state.pipeline[j] -
                     realized_demand[j];
        next.inventory[j] = std::max(net, 0.0);
        next.backlog[j] = std::max(-net, 0.0);
        next.pipeline[j] = decision.production[j];
        cost += inst.holding_cost[t][j] * next.inventory[j] +
                inst.backlog_cost[t][j] * next.backlog[j] +
                inst.setup_cost[t][j] * decision.setup[j];
    }
    return {std::move(next), cost};
}

PolicyTrace run_rolling_horizon(const MSlagInstance& inst, const TruthScenario& truth,
                                const ForecasterGroup& group, const PolicyConfig& cfg,
                                SystemState initial_state) {
    const int T = inst.periods;
    const int J = inst.products;
    if (truth.periods() != T || truth.products() != J)
        throw DimensionMismatch("run_rolling_horizon: truth does not span the instance");
    if (group.products() != J)
        throw DimensionMismatch("run_rolling_horizon: forecaster group size mismatch");

    PolicyTrace trace;
    SystemState state = std::move(initial_state);
    ForecasterGroup cond = group;  // histories grow as truth arrives

    for (int t = 0; t < T; ++t) {
        const auto& observed = truth.demands[t];
        for (int j = 0; j < J; ++j) cond.histories[j].push_back(observed[j]);

        const int tail = T - 1 - t;  // future periods beyond the current one
        MILPModel model;
        std::uint64_t step_seed = substream_seed(cfg.seed, static_cast<std::uint64_t>(t));
        switch (cfg.policy) {
            case PolicyKind::Deterministic: {
                Scenario sc;
                if (tail > 0) sc = expected_scenario(cond, tail);
                model = build_deterministic(inst, state, observed, sc);
                break;
            }
            case PolicyKind::Robust: {
                Scenario sc;
                sc.label = ScenarioLabel::WorstCase;
                if (tail > 0) sc = worst_case_scenario(cond, tail, cfg.confidence);
                model = build_deterministic(inst, state, observed, sc);
                break;
            }
            case PolicyKind::TwoStage: {
                if (tail > 0) {
                    auto set = sample_scenario_set(cond, tail, cfg.scenario_count, step_seed);
                    model = build_two_stage(inst, state, observed, set);
                } else {
                    model = build_deterministic(inst, state, observed, Scenario{});
                }
                break;
            }
        }

        MILPSolution sol = solve_milp(model, cfg.solver);
        if (sol.status != MILPStatus::Optimal) {
            trace.aborted = true;
            trace.abort_reason = "solver did not reach optimality at period " + std::to_string(t);
            return trace;
        }

        StepRecord rec;
        rec.decision = extract_first_stage(model, sol);
        rec.nodes = sol.nodes;
        rec.objective = sol.objective;
        auto [next, cost] = advance_state(inst, t, state, rec.decision, observed);
        rec.state_after = next;
        rec.cost = cost;
        trace.total_cost += cost;
        trace.steps.push_back(std::move(rec));
        state = std::move(next);
    }
    return trace;
}

PolicyTrace run_rolling_horizon(const MSlagInstance& inst, const TruthScenario& truth,
                                const ForecasterGroup& group, const PolicyConfig& cfg) {
    return run_rolling_horizon(inst, truth, group, cfg, SystemState::zero(inst.products));
}

} // namespace rollcast
