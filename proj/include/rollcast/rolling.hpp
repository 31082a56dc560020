#pragma once

#include "rollcast/dataset.hpp"
#include "rollcast/model_build.hpp"
#include "rollcast/scenario.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rollcast {

enum class PolicyKind { Deterministic, TwoStage, Robust };

struct PolicyConfig {
    PolicyKind policy = PolicyKind::Deterministic;
    int scenario_count = 9;     // two-stage only
    double confidence = 0.9;    // robust only
    std::uint64_t seed = 0;
    MILPOptions solver;
};

struct StepRecord {
    Decision decision;
    SystemState state_after;
    double cost = 0.0;
    std::int64_t nodes = 0;
    double objective = 0.0;  // look-ahead model optimum at this step
};

struct PolicyTrace {
    std::vector<StepRecord> steps;
    double total_cost = 0.0;
    bool aborted = false;        // solver limit hit, trace is partial
    std::string abort_reason;
};

/// Contiguous cover of `periods` into n_stages nonempty subsets; the first
/// subset is the single current period, the rest split as evenly as
/// possible with earlier sets taking the extra.
std::vector<std::vector<int>> partition_periods(const std::vector<int>& periods, int n_stages);

/// Closed-form realized state recursion plus the period's realized cost at
/// global period `t`.
std::pair<SystemState, double> advance_state(const MSlagInstance& inst, int t,
                                             const SystemState& state, const Decision& decision,
                                             const std::vector<double>& realized_demand);

/// One rolling-horizon run: at each period, observe the truth row, produce
/// the policy's scenario object conditioned on the accumulated history,
/// solve the look-ahead MILP, implement the first stage, and advance the
/// realized state. Forecasters are fitted beforehand and only conditioned.
PolicyTrace run_rolling_horizon(const MSlagInstance& inst, const TruthScenario& truth,
                                const ForecasterGroup& group, const PolicyConfig& cfg,
                                SystemState initial_state);

PolicyTrace run_rolling_horizon(const MSlagInstance& inst, const TruthScenario& truth,
                                const ForecasterGroup& group, const PolicyConfig& cfg);

} // namespace rollcast
