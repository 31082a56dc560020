#pragma once

#include "rollcast/instance.hpp"
#include "rollcast/milp.hpp"
#include "rollcast/scenario.hpp"

#include <stdexcept>
#include <vector>

namespace rollcast {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionMismatch : ModelError { using ModelError::ModelError; };
struct NotOptimal : ModelError { using ModelError::ModelError; };

/// First-stage values read back from a solved look-ahead model.
struct Decision {
    std::vector<double> production;  // x_j
    std::vector<int> setup;          // y_j
    double overtime = 0.0;
    std::vector<double> inventory;   // model-implied end-of-period i+_j
    std::vector<double> backlog;     // i-_j
    bool production_snapped = false; // some x was forced to 0 by y=0
};

/// Single-scenario look-ahead MILP over the remaining horizon. The model
/// covers inst periods (T - future.periods() - 1) .. T-1; the first period
/// uses the observed current_demand, later periods the scenario rows.
/// Production decided in a period arrives the next one; state.pipeline
/// feeds the first period and the final global period's production is
/// forced to zero.
MILPModel build_deterministic(const MSlagInstance& inst, const SystemState& state,
                              const std::vector<double>& current_demand, const Scenario& future);

/// Extensive form: first-period variables shared, later periods duplicated
/// per scenario with weight 1/|S| in the objective.
MILPModel build_two_stage(const MSlagInstance& inst, const SystemState& state,
                          const std::vector<double>& current_demand, const ScenarioSet& scenarios);

/// Full-horizon deterministic model on the realized demands; its optimum is
/// the perfect-information bound.
MILPModel build_perfect_information(const MSlagInstance& inst, const SystemState& init_state,
                                    const TruthScenario& truth);

Decision extract_first_stage(const MILPModel& model, const MILPSolution& solution);

} // namespace rollcast
