#pragma once

#include <vector>

namespace rollcast {

/// Deterministic parameters of the multi-item lot-sizing problem with
/// backlogging and a one-period production lag. Matrices are indexed
/// [period][product], period vectors [period].
struct MSlagInstance {
    int periods = 0;   // T
    int products = 0;  // |J|

    std::vector<std::vector<double>> big_m;         // linking bound M_tj
    std::vector<double> setup_time;                 // TS_j
    std::vector<double> unit_time;                  // TB_j
    std::vector<double> capacity;                   // C_t
    std::vector<std::vector<double>> inv_capacity;  // I_tj
    std::vector<double> overtime_bound;             // O_t

    std::vector<std::vector<double>> setup_cost;    // C^y_tj
    std::vector<std::vector<double>> backlog_cost;  // C^{i-}_tj
    std::vector<std::vector<double>> holding_cost;  // C^{i+}_tj
    std::vector<double> overtime_cost;              // C^o_t

    bool valid_dims() const;
};

/// Realized per-product state handed between rolling-horizon steps.
/// `pipeline` is last period's production, arriving this period.
struct SystemState {
    std::vector<double> inventory;
    std::vector<double> backlog;
    std::vector<double> pipeline;

    static SystemState zero(int products) {
        return {std::vector<double>(products, 0.0), std::vector<double>(products, 0.0),
                std::vector<double>(products, 0.0)};
    }
};

} // namespace rollcast
