#include "rollcast/forecast.hpp"

#include "rollcast/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rollcast {

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ForecastError("quantile level must be in (0,1)");

    // Acklam's rational approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= phigh) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        double q = std::sqrt(-2 * std::log(1 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    // One Halley refinement against the actual CDF.
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
    return x - u / (1 + x * u / 2);
}

double negative_binomial_quantile(double mu, double alpha, double rho) {
    if (mu <= 0.0) return 0.0;
    double r = 1.0 / alpha;
    double p = r / (r + mu);  // success probability
    // pmf(0) = p^r, pmf(k+1) = pmf(k) * (k + r) / (k + 1) * (1 - p)
    double pmf = std::pow(p, r);
    double cdf = pmf;
    double k = 0.0;
    while (cdf < rho && k < 1e7) {
        pmf *= (k + r) / (k + 1.0) * (1.0 - p);
        cdf += pmf;
        k += 1.0;
        if (pmf < 1e-300 && cdf < rho) break;  // numeric underflow guard
    }
    return k;
}

double Marginal::mean() const {
    switch (kind) {
        case Kind::Gaussian: return a;
        case Kind::LogGaussian: return std::expm1(std::max(a, 0.0));
        case Kind::NegativeBinomial: return a;
    }
    return a;
}

double Marginal::quantile(double rho) const {
    switch (kind) {
        case Kind::Gaussian:
            return b > 0 ? a + inverse_normal_cdf(rho) * b : a;
        case Kind::LogGaussian: {
            double q = b > 0 ? a + inverse_normal_cdf(rho) * b : a;
            return std::expm1(std::max(q, 0.0));  // demand transform admits no negatives
        }
        case Kind::NegativeBinomial:
            return negative_binomial_quantile(a, b, rho);
    }
    return a;
}

std::vector<double> quantile(const ForecastDistribution& dist, double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw ForecastError("rho must be in (0,1)");
    std::vector<double> out;
    out.reserve(dist.marginals.size());
    for (const auto& m : dist.marginals) out.push_back(m.quantile(rho));
    return out;
}

SamplePaths Forecaster::sample(std::span<const double> history, int horizon, int count,
                               std::uint64_t seed) const {
    if (history.empty()) throw EmptyHistory("sample: empty history");
    if (horizon < 1 || count < 1) throw ForecastError("sample: horizon and count must be >= 1");
    SamplePaths out;
    out.rng_seed = seed;
    out.paths.assign(count, std::vector<double>(horizon, 0.0));
    for (int s = 0; s < count; ++s) {
        Rng rng(substream_seed(seed, static_cast<std::uint64_t>(s)));
        sample_path(history, out.paths[s], rng);
    }
    return out;
}

// ---------------------------------------------------------------------------
// AR(1)

Ar1Model fit_ar1(std::span<const double> series) {
    if (series.size() < 3) throw ForecastError("fit_ar1: need at least 3 observations");

    const std::size_t n = series.size() - 1;  // pairs (x_{t-1}, x_t)
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += series[i];
        my += series[i + 1];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (series[i] - mx) * (series[i] - mx);
        sxy += (series[i] - mx) * (series[i + 1] - my);
    }

    Ar1Model m;
    if (sxx <= 1e-12) {
        // Constant (or near-constant) lag column: memoryless fit.
        m.phi = 0.0;
        m.gamma = my;
        m.noise_std = 0.0;
        double ss = 0;
        for (std::size_t i = 0; i < n; ++i) ss += (series[i + 1] - my) * (series[i + 1] - my);
        if (n > 1) m.noise_std = std::sqrt(ss / (n - 1));
        return m;
    }

    m.phi = sxy / sxx;
    double intercept = my - m.phi * mx;
    m.gamma = std::abs(1.0 - m.phi) > 1e-12 ? intercept / (1.0 - m.phi) : my;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = series[i + 1] - (m.phi * series[i] + intercept);
        ss += r * r;
    }
    m.noise_std = n > 2 ? std::sqrt(ss / (n - 2)) : std::sqrt(ss / n);
    m.stationary = std::abs(m.phi) < 1.0;
    return m;
}

ForecastDistribution Ar1Model::predict(std::span<const double> history, int horizon) const {
    if (history.empty()) throw EmptyHistory("predict: empty history");
    if (horizon < 1) throw ForecastError("predict: horizon must be >= 1");
    ForecastDistribution dist;
    dist.marginals.reserve(horizon);
    double last = history.back();
    double var = 0.0;
    double phik = 1.0;
    for (int k = 1; k <= horizon; ++k) {
        var += phik * phik * noise_std * noise_std;  // sigma^2 sum phi^{2i}, i<k
        phik *= phi;
        Marginal m;
        m.kind = Marginal::Kind::Gaussian;
        m.a = gamma + phik * (last - gamma);
        m.b = std::sqrt(var);
        dist.marginals.push_back(m);
    }
    return dist;
}

void Ar1Model::sample_path(std::span<const double> history, std::span<double> out,
                           Rng& rng) const {
    double prev = history.back();
    for (std::size_t k = 0; k < out.size(); ++k) {
        double next = phi * prev + (1.0 - phi) * gamma;
        if (noise_std > 0) next += rng.normal(0.0, noise_std);
        out[k] = next;
        prev = next;
    }
}

// ---------------------------------------------------------------------------
// Moving average / logarithmic moving average

namespace {

double to_model_space(double x, bool log_space) { return log_space ? std::log1p(x) : x; }
double from_model_space(double x, bool log_space) { return log_space ? std::expm1(x) : x; }

} // namespace

MaModel fit_ma(std::span<const double> series, int q, bool log_space) {
    if (q < 1) throw ForecastError("fit_ma: q must be >= 1");
    if (series.size() < static_cast<std::size_t>(q) + 1)
        throw WindowTooLarge("fit_ma: window q=" + std::to_string(q) + " needs " +
                             std::to_string(q + 1) + " observations, have " +
                             std::to_string(series.size()));

    std::vector<double> work(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (log_space && series[i] < 0) throw ForecastError("fit_ma: negative value in log space");
        work[i] = to_model_space(series[i], log_space);
    }

    // One-step-ahead in-sample residuals of the averaging rule.
    double ss = 0;
    std::size_t cnt = 0;
    for (std::size_t t = q; t < work.size(); ++t) {
        double pred = std::accumulate(work.begin() + t - q, work.begin() + t, 0.0) / q;
        double r = work[t] - pred;
        ss += r * r;
        ++cnt;
    }

    MaModel m;
    m.q = q;
    m.log_space = log_space;
    m.residual_std = cnt > 0 ? std::sqrt(ss / cnt) : 0.0;
    return m;
}

ForecastDistribution MaModel::predict(std::span<const double> history, int horizon) const {
    if (history.empty()) throw EmptyHistory("predict: empty history");
    if (horizon < 1) throw ForecastError("predict: horizon must be >= 1");
    if (history.size() < static_cast<std::size_t>(q))
        throw WindowTooLarge("predict: history shorter than window");

    std::vector<double> window(q);
    for (int i = 0; i < q; ++i)
        window[i] = to_model_space(history[history.size() - q + i], log_space);

    ForecastDistribution dist;
    dist.marginals.reserve(horizon);
    for (int k = 1; k <= horizon; ++k) {
        double pred = std::accumulate(window.begin(), window.end(), 0.0) / q;
        Marginal m;
        m.kind = log_space ? Marginal::Kind::LogGaussian : Marginal::Kind::Gaussian;
        m.a = pred;
        m.b = residual_std * std::sqrt(static_cast<double>(k));
        dist.marginals.push_back(m);
        window.erase(window.begin());
        window.push_back(pred);  // recursive self-feeding
    }
    return dist;
}

void MaModel::sample_path(std::span<const double> history, std::span<double> out,
                          Rng& rng) const {
    if (history.size() < static_cast<std::size_t>(q))
        throw WindowTooLarge("sample: history shorter than window");
    std::vector<double> window(q);
    for (int i = 0; i < q; ++i)
        window[i] = to_model_space(history[history.size() - q + i], log_space);
    for (std::size_t k = 0; k < out.size(); ++k) {
        double pred = std::accumulate(window.begin(), window.end(), 0.0) / q;
        double draw = pred + (residual_std > 0 ? rng.normal(0.0, residual_std) : 0.0);
        if (log_space) draw = std::max(draw, 0.0);  // stay in the transform's range
        out[k] = from_model_space(draw, log_space);
        window.erase(window.begin());
        window.push_back(draw);
    }
}

} // namespace rollcast
