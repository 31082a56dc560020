#pragma once

#include "rollcast/forecast.hpp"

#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace rollcast {

enum class ScenarioLabel { Expected, WorstCase, Sampled, Truth };

/// Demand matrix over future periods x products. Entries are clamped at
/// zero by every producer so the MILP builders never see negative demand.
struct Scenario {
    std::vector<std::vector<double>> demands;  // [period][product]
    ScenarioLabel label = ScenarioLabel::Expected;

    int periods() const { return static_cast<int>(demands.size()); }
    int products() const { return demands.empty() ? 0 : static_cast<int>(demands[0].size()); }
};

/// Equally weighted scenarios (probability 1/|S| each).
struct ScenarioSet {
    std::vector<Scenario> scenarios;
    std::uint64_t seed = 0;
};

/// One forecaster per product plus its conditioning history; the unit the
/// scenario producers consume.
struct ForecasterGroup {
    std::vector<std::shared_ptr<Forecaster>> models;     // one per product
    std::vector<std::vector<double>> histories;          // one per product

    int products() const { return static_cast<int>(models.size()); }
};

/// Conditional-mean scenario: per-period expected demand, clamped at zero.
Scenario expected_scenario(const ForecasterGroup& group, int horizon);

/// i.i.d. conditional sample paths; negatives replaced by zero.
ScenarioSet sample_scenario_set(const ForecasterGroup& group, int horizon, int count,
                                std::uint64_t seed);

/// Upper end of the central confidence interval: the (1+confidence)/2
/// marginal quantile per period, per product.
Scenario worst_case_scenario(const ForecasterGroup& group, int horizon, double confidence);

/// CSV with columns scenario,t,product,demand.
void write_scenario_set_csv(const ScenarioSet& set, std::ostream& out);
ScenarioSet read_scenario_set_csv(std::istream& in);

} // namespace rollcast
