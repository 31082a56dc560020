#include "rollcast/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "json.hpp"

namespace rollcast {

double nd(const std::vector<std::vector<double>>& truth,
          const std::vector<std::vector<double>>& predicted_median) {
    if (truth.size() != predicted_median.size())
        throw MetricError("nd: shape mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < truth.size(); ++t) {
        if (truth[t].size() != predicted_median[t].size())
            throw MetricError("nd: shape mismatch");
        for (std::size_t j = 0; j < truth[t].size(); ++j) {
            num += std::abs(truth[t][j] - predicted_median[t][j]);
            den += std::abs(truth[t][j]);
        }
    }
    if (den <= 0.0) throw ZeroDenominator("nd: all truth demand is zero");
    return num / den;
}

namespace {

// Round off the last ulp of binary noise so decimal inputs give decimal outputs.
double snap15(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return std::strtod(buf, nullptr);
}

} // namespace

double rho_risk_product(double rho, double z, double z_hat) {
    if (!(rho > 0.0 && rho < 1.0)) throw MetricError("rho_risk: rho must be in (0,1)");
    double indicator = z_hat > z ? rho : -(1.0 - rho);
    return snap15(2.0 * (z_hat - z) * indicator);
}

double rho_risk_aggregate(double rho, const std::vector<std::pair<double, double>>& z_pairs) {
    double num = 0.0, den = 0.0;
    for (auto [z, z_hat] : z_pairs) {
        num += rho_risk_product(rho, z, z_hat);
        den += z;
    }
    if (den <= 0.0) throw ZeroDenominator("rho_risk_aggregate: zero total demand");
    return num / den;
}

double gap_percent(double policy_cost, double pi_cost) {
    if (pi_cost <= 1e-12) throw ZeroPIBound("gap_percent: nonpositive PI bound");
    return (100.0 * policy_cost - 100.0 * pi_cost) / pi_cost;
}

std::string MetricReport::to_json() const {
    nlohmann::json j;
    j["nd"] = nd_table;
    j["rho_risk"] = rho_risk;
    j["gap_percent"] = gap_percent;
    j["metadata"] = metadata;
    return j.dump(2);
}

} // namespace rollcast
