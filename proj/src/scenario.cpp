#include "rollcast/scenario.hpp"

#include "rollcast/rng.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <sstream>

namespace rollcast {

namespace {

double clamp0(double x) { return x > 0.0 ? x : 0.0; }

void check_group(const ForecasterGroup& group, int horizon) {
    if (group.models.empty()) throw ForecastError("scenario: empty forecaster group");
    if (group.models.size() != group.histories.size())
        throw ForecastError("scenario: model/history count mismatch");
    if (horizon < 1) throw ForecastError("scenario: horizon must be >= 1");
}

} // namespace

Scenario expected_scenario(const ForecasterGroup& group, int horizon) {
    check_group(group, horizon);
    Scenario sc;
    sc.label = ScenarioLabel::Expected;
    sc.demands.assign(horizon, std::vector<double>(group.products(), 0.0));
    for (int j = 0; j < group.products(); ++j) {
        auto dist = group.models[j]->predict(group.histories[j], horizon);
        for (int k = 0; k < horizon; ++k) sc.demands[k][j] = clamp0(dist.marginals[k].mean());
    }
    return sc;
}

ScenarioSet sample_scenario_set(const ForecasterGroup& group, int horizon, int count,
                                std::uint64_t seed) {
    check_group(group, horizon);
    if (count < 1) throw ForecastError("scenario: count must be >= 1");
    ScenarioSet set;
    set.seed = seed;
    set.scenarios.assign(count, Scenario{});
    for (auto& sc : set.scenarios) {
        sc.label = ScenarioLabel::Sampled;
        sc.demands.assign(horizon, std::vector<double>(group.products(), 0.0));
    }
    for (int j = 0; j < group.products(); ++j) {
        auto paths = group.models[j]->sample(group.histories[j], horizon, count,
                                             substream_seed(seed, static_cast<std::uint64_t>(j)));
        for (int s = 0; s < count; ++s)
            for (int k = 0; k < horizon; ++k)
                set.scenarios[s].demands[k][j] = clamp0(paths.paths[s][k]);
    }
    return set;
}

Scenario worst_case_scenario(const ForecasterGroup& group, int horizon, double confidence) {
    check_group(group, horizon);
    if (!(confidence > 0.0 && confidence < 1.0))
        throw ForecastError("scenario: confidence must be in (0,1)");
    const double rho = (1.0 + confidence) / 2.0;
    Scenario sc;
    sc.label = ScenarioLabel::WorstCase;
    sc.demands.assign(horizon, std::vector<double>(group.products(), 0.0));
    for (int j = 0; j < group.products(); ++j) {
        auto dist = group.models[j]->predict(group.histories[j], horizon);
        auto q = quantile(dist, rho);
        for (int k = 0; k < horizon; ++k) sc.demands[k][j] = clamp0(q[k]);
    }
    return sc;
}

void write_scenario_set_csv(const ScenarioSet& set, std::ostream& out) {
    out.precision(17);
    out << "scenario,t,product,demand\n";
    for (std::size_t s = 0; s < set.scenarios.size(); ++s) {
        const auto& sc = set.scenarios[s];
        for (int t = 0; t < sc.periods(); ++t)
            for (int j = 0; j < sc.products(); ++j)
                out << s << "," << t << "," << j << "," << sc.demands[t][j] << "\n";
    }
}

ScenarioSet read_scenario_set_csv(std::istream& in) {
    ScenarioSet set;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        long vals_i[3];
        for (int c = 0; c < 3; ++c) {
            std::getline(ss, cell, ',');
            vals_i[c] = std::stol(cell);
        }
        std::getline(ss, cell, ',');
        double d = std::stod(cell);
        auto s = static_cast<std::size_t>(vals_i[0]);
        auto t = static_cast<std::size_t>(vals_i[1]);
        auto j = static_cast<std::size_t>(vals_i[2]);
        if (set.scenarios.size() <= s) set.scenarios.resize(s + 1);
        auto& sc = set.scenarios[s];
        sc.label = ScenarioLabel::Sampled;
        if (sc.demands.size() <= t) sc.demands.resize(t + 1);
        if (sc.demands[t].size() <= j) sc.demands[t].resize(j + 1, 0.0);
        sc.demands[t][j] = d;
    }
    return set;
}

} // namespace rollcast
