#pragma once

#include "rollcast/dataset.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rollcast {

struct ForecastError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyHistory : ForecastError { using ForecastError::ForecastError; };
struct WindowTooLarge : ForecastError { using ForecastError::ForecastError; };

/// One-period predictive law. Gaussian for AR/MA, Gaussian in log(1+x)
/// space for LogMA, negative binomial (mean/dispersion) for the recurrent
/// model.
struct Marginal {
    enum class Kind { Gaussian, LogGaussian, NegativeBinomial };
    Kind kind = Kind::Gaussian;
    double a = 0.0;  // mean (model space for LogGaussian; mu for NB)
    double b = 0.0;  // std (model space for LogGaussian; dispersion alpha for NB)

    double mean() const;
    double quantile(double rho) const;
};

/// Per-period marginals for one series over a forecast horizon, plus the
/// conditioning step (number of planning-horizon observations consumed).
struct ForecastDistribution {
    std::vector<Marginal> marginals;
    int conditioning_step = 0;

    int horizon() const { return static_cast<int>(marginals.size()); }
};

/// Equal-weight sample paths for one series: paths[s][k] is the draw for
/// horizon period k in scenario s.
struct SamplePaths {
    std::vector<std::vector<double>> paths;
    std::uint64_t rng_seed = 0;
};

/// A fitted single-series probabilistic forecaster. Conditioning happens
/// through the history argument; models are immutable once fitted.
class Forecaster {
public:
    virtual ~Forecaster() = default;

    virtual ForecastDistribution predict(std::span<const double> history, int horizon) const = 0;

    /// Ancestral sampling: each path re-runs the model on the history, then
    /// alternates a one-step draw with feeding the draw back as input.
    /// Path s uses the substream derived from (seed, s).
    virtual SamplePaths sample(std::span<const double> history, int horizon, int count,
                               std::uint64_t seed) const;

    /// One ancestral path into `out`; rng is the path's own substream.
    virtual void sample_path(std::span<const double> history, std::span<double> out,
                             class Rng& rng) const = 0;
};

/// ξ_t = φ ξ_{t-1} + (1-φ) γ + ε_t with Gaussian white noise.
struct Ar1Model final : Forecaster {
    double phi = 0.0;
    double gamma = 0.0;
    double noise_std = 0.0;
    bool stationary = true;  // false when the fit produced |phi| >= 1

    ForecastDistribution predict(std::span<const double> history, int horizon) const override;
    void sample_path(std::span<const double> history, std::span<double> out,
                     Rng& rng) const override;
};

/// Ordinary least squares of ξ_t on ξ_{t-1} with intercept; a constant
/// series degenerates to phi=0, gamma=const, noise_std=0.
Ar1Model fit_ar1(std::span<const double> series);

/// Mean of the last q observations, recursively self-fed for multi-step
/// forecasts. log_space applies log(1+x)/expm1 around the rule.
struct MaModel final : Forecaster {
    int q = 1;
    bool log_space = false;
    double residual_std = 0.0;  // in model space

    ForecastDistribution predict(std::span<const double> history, int horizon) const override;
    void sample_path(std::span<const double> history, std::span<double> out,
                     Rng& rng) const override;
};

MaModel fit_ma(std::span<const double> series, int q, bool log_space);

/// Per-period quantiles of a forecast distribution; quantiles commute with
/// the monotone log transform, NB quantiles are the smallest integer whose
/// CDF reaches rho.
std::vector<double> quantile(const ForecastDistribution& dist, double rho);

/// Inverse standard normal CDF (Acklam's rational approximation, refined by
/// one Halley step; |error| < 1e-9).
double inverse_normal_cdf(double p);

/// Negative binomial CDF quantile for mean mu, dispersion alpha.
double negative_binomial_quantile(double mu, double alpha, double rho);

} // namespace rollcast
