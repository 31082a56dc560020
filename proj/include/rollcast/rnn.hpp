#pragma once

#include "rollcast/dataset.hpp"
#include "rollcast/forecast.hpp"
#include "rollcast/rng.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rollcast {

struct DivergedTraining : ForecastError {
    using ForecastError::ForecastError;
};

struct RnnConfig {
    int hidden_size = 32;
    int epochs = 100;
    double learning_rate = 5e-3;
    int horizon = 8;          // prediction horizon length tau
    int context_length = 0;   // 0 -> 2 * horizon
    int window_stride = 1;
    double grad_clip = 10.0;
    bool use_covariates = true;

    int effective_context() const { return context_length > 0 ? context_length : 2 * horizon; }
};

/// Single-layer gated recurrent cell with a negative-binomial output head:
/// mean through an exponential link, dispersion through a softplus link.
/// Parameters live in one flat vector so the optimizer and the finite
/// difference check can treat them uniformly.
class RnnNet {
public:
    RnnNet() = default;
    RnnNet(int input_dim, int hidden, std::uint64_t seed);

    int input_dim() const { return input_dim_; }
    int hidden() const { return hidden_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    /// h' = cell(h, x); h must have hidden() entries.
    void step(std::span<const double> x, std::span<const double> h_prev,
              std::span<double> h_out) const;

    /// Negative binomial head: mu in scaled space, alpha > 0.
    void head(std::span<const double> h, double& mu, double& alpha) const;

    /// Mean NLL of the window and its gradient via backprop through time.
    /// inputs[t] is the step-t input vector, targets[t] the scaled demand.
    /// grad has params() size and is overwritten.
    double nll_window(const std::vector<std::vector<double>>& inputs,
                      const std::vector<double>& targets, std::vector<double>* grad) const;

private:
    friend class RnnForecaster;
    int input_dim_ = 0;
    int hidden_ = 0;
    std::vector<double> params_;
};

/// Global forecaster fitted across all series jointly; per-series scale
/// normalizes inputs, covariates are z-scored with training statistics.
class RnnForecaster {
public:
    RnnNet net;
    RnnConfig config;
    std::map<std::string, double> scale;  // per series id: 1 + training mean
    std::vector<std::string> covariate_names;
    std::map<std::string, std::pair<double, double>> covariate_stats;  // mean, std
    std::vector<double> epoch_loss;

    /// Single-series view bound to one series id; optional covariate rows
    /// must extend past the history for the horizon being forecast.
    std::shared_ptr<Forecaster> series_forecaster(
        const std::string& id, std::vector<std::vector<double>> future_covariates = {}) const;

    double series_scale(const std::string& id) const;

    /// Step-t input vector: previous (scaled) demand plus normalized covariates.
    std::vector<double> make_input(double prev_value, double scl,
                                   const std::vector<double>& covariate_row) const;
};

/// Trains the global model by Adam on the window NLL, windows drawn from
/// all series with a seeded shuffle each epoch. Deterministic given seed.
RnnForecaster rnn_train(const TimeSeriesSet& data, const RnnConfig& config, std::uint64_t seed);

/// Compares the analytic window gradient against central finite differences
/// (step 1e-5) on `probes` randomly selected parameters; returns the maximum
/// relative error over the probe set.
double rnn_gradient_check(const RnnNet& net,
                          const std::vector<std::vector<std::vector<double>>>& input_windows,
                          const std::vector<std::vector<double>>& target_windows,
                          int probes, std::uint64_t seed);

} // namespace rollcast
