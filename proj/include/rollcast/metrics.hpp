#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rollcast {

struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ZeroDenominator : MetricError { using MetricError::MetricError; };
struct ZeroPIBound : MetricError { using MetricError::MetricError; };

/// Normalized deviation: sum of absolute errors over total absolute demand,
/// both summed over every period and product of the given range.
double nd(const std::vector<std::vector<double>>& truth,
          const std::vector<std::vector<double>>& predicted_median);

/// Quantile loss of the predicted rho-quantile of aggregate demand:
/// 2 (Zhat - Z) (rho 1{Zhat>Z} - (1-rho) 1{Zhat<=Z}); nonnegative always.
double rho_risk_product(double rho, double z, double z_hat);

/// Sum of per-product quantile losses over total realized demand.
double rho_risk_aggregate(double rho, const std::vector<std::pair<double, double>>& z_pairs);

/// 100 (policy - pi) / pi.
double gap_percent(double policy_cost, double pi_cost);

struct MetricReport {
    std::vector<double> nd_table;                 // indexed by conditioning step t'
    std::map<std::string, double> rho_risk;       // key: rho level as string
    double gap_percent = 0.0;
    std::map<std::string, std::string> metadata;  // forecaster, policy, T, seeds

    std::string to_json() const;
};

} // namespace rollcast
