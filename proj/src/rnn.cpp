#include "rollcast/rnn.hpp"

#include "rollcast/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rollcast {

namespace {

constexpr double kAlphaFloor = 1e-4;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double softplus(double x) { return x > 30 ? x : std::log1p(std::exp(x)); }

double digamma(double x) {
    // Recurrence to x >= 6, then the asymptotic series.
    double acc = 0.0;
    while (x < 6.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    double inv = 1.0 / x, inv2 = inv * inv;
    return acc + std::log(x) - 0.5 * inv -
           inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 / 252));
}

// Negative binomial log-likelihood, mean mu, dispersion alpha,
// generalized to real-valued y >= 0 through the gamma function.
double nb_log_likelihood(double y, double mu, double alpha) {
    double r = 1.0 / alpha;
    return std::lgamma(y + r) - std::lgamma(r) - std::lgamma(y + 1.0) + r * std::log(r) -
           (y + r) * std::log(r + mu) + y * std::log(std::max(mu, 1e-12));
}

void nb_gradient(double y, double mu, double alpha, double& dll_dmu, double& dll_dalpha) {
    double r = 1.0 / alpha;
    dll_dmu = y / std::max(mu, 1e-12) - (y + r) / (r + mu);
    double dll_dr = digamma(y + r) - digamma(r) + std::log(r) + 1.0 - std::log(r + mu) -
                    (y + r) / (r + mu);
    dll_dalpha = -dll_dr / (alpha * alpha);
}

} // namespace

// ---------------------------------------------------------------------------
// Parameter layout

// Offsets into the flat parameter vector for a cell with input dim D and
// hidden size H:
//   Wz, Wr, Wh : H x D row-major
//   Uz, Ur, Uh : H x H row-major
//   bz, br, bh : H
//   wm, wa     : H
//   bm, ba     : scalars
struct Layout {
    int D, H;
    int wz, wr, wh, uz, ur, uh, bz, br, bh, wm, wa, bm, ba, total;

    Layout(int d, int h) : D(d), H(h) {
        int off = 0;
        auto take = [&off](int n) {
            int at = off;
            off += n;
            return at;
        };
        wz = take(H * D);
        wr = take(H * D);
        wh = take(H * D);
        uz = take(H * H);
        ur = take(H * H);
        uh = take(H * H);
        bz = take(H);
        br = take(H);
        bh = take(H);
        wm = take(H);
        wa = take(H);
        bm = take(1);
        ba = take(1);
        total = off;
    }
};

RnnNet::RnnNet(int input_dim, int hidden, std::uint64_t seed)
    : input_dim_(input_dim), hidden_(hidden) {
    Layout lay(input_dim, hidden);
    params_.resize(lay.total);
    Rng rng(seed);
    double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (double& p : params_) p = rng.uniform(-bound, bound);
    params_[lay.bm] = 0.0;  // initial scaled mean near 1
    params_[lay.ba] = 0.0;
}

namespace {

// mat (rows x cols, row-major) times vec, accumulated into out.
void matvec_add(const double* mat, int rows, int cols, const double* vec, double* out) {
    for (int i = 0; i < rows; ++i)
        out[i] += kernels::active().dot(mat + static_cast<std::size_t>(i) * cols, vec, cols);
}

// out += mat^T * d  (mat rows x cols), i.e. out[k] += sum_i mat[i][k] d[i].
void matTvec_add(const double* mat, int rows, int cols, const double* d, double* out) {
    for (int i = 0; i < rows; ++i)
        kernels::active().axpy(d[i], mat + static_cast<std::size_t>(i) * cols, out, cols);
}

// grad += d (x) v : outer product accumulation into a rows x cols block.
void outer_add(double* grad, int rows, int cols, const double* d, const double* v) {
    for (int i = 0; i < rows; ++i)
        kernels::active().axpy(d[i], v, grad + static_cast<std::size_t>(i) * cols, cols);
}

struct StepCache {
    std::vector<double> x, h_prev, z, r, c, h, rh;
    double mu_s, alpha, v_pre;
};

} // namespace

void RnnNet::step(std::span<const double> x, std::span<const double> h_prev,
                  std::span<double> h_out) const {
    const Layout lay(input_dim_, hidden_);
    const double* p = params_.data();
    const int H = hidden_, D = input_dim_;

    std::vector<double> pre_z(p + lay.bz, p + lay.bz + H);
    std::vector<double> pre_r(p + lay.br, p + lay.br + H);
    matvec_add(p + lay.wz, H, D, x.data(), pre_z.data());
    matvec_add(p + lay.uz, H, H, h_prev.data(), pre_z.data());
    matvec_add(p + lay.wr, H, D, x.data(), pre_r.data());
    matvec_add(p + lay.ur, H, H, h_prev.data(), pre_r.data());

    std::vector<double> rh(H), pre_c(p + lay.bh, p + lay.bh + H);
    for (int i = 0; i < H; ++i) rh[i] = sigmoid(pre_r[i]) * h_prev[i];
    matvec_add(p + lay.wh, H, D, x.data(), pre_c.data());
    matvec_add(p + lay.uh, H, H, rh.data(), pre_c.data());

    for (int i = 0; i < H; ++i) {
        double z = sigmoid(pre_z[i]);
        double c = std::tanh(pre_c[i]);
        h_out[i] = (1.0 - z) * h_prev[i] + z * c;
    }
}

void RnnNet::head(std::span<const double> h, double& mu, double& alpha) const {
    const Layout lay(input_dim_, hidden_);
    const double* p = params_.data();
    double u = p[lay.bm] + kernels::active().dot(p + lay.wm, h.data(), hidden_);
    double v = p[lay.ba] + kernels::active().dot(p + lay.wa, h.data(), hidden_);
    mu = std::exp(std::min(u, 30.0));
    alpha = softplus(v) + kAlphaFloor;
}

double RnnNet::nll_window(const std::vector<std::vector<double>>& inputs,
                          const std::vector<double>& targets,
                          std::vector<double>* grad) const {
    const Layout lay(input_dim_, hidden_);
    const double* p = params_.data();
    const int H = hidden_, D = input_dim_;
    const std::size_t T = inputs.size();

    // Forward with cache.
    std::vector<StepCache> cache(T);
    std::vector<double> h(H, 0.0);
    double loss = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        StepCache& s = cache[t];
        s.x = inputs[t];
        s.h_prev = h;
        s.z.resize(H);
        s.r.resize(H);
        s.c.resize(H);
        s.h.resize(H);
        s.rh.resize(H);

        std::vector<double> pre_z(p + lay.bz, p + lay.bz + H);
        std::vector<double> pre_r(p + lay.br, p + lay.br + H);
        matvec_add(p + lay.wz, H, D, s.x.data(), pre_z.data());
        matvec_add(p + lay.uz, H, H, h.data(), pre_z.data());
        matvec_add(p + lay.wr, H, D, s.x.data(), pre_r.data());
        matvec_add(p + lay.ur, H, H, h.data(), pre_r.data());
        for (int i = 0; i < H; ++i) {
            s.z[i] = sigmoid(pre_z[i]);
            s.r[i] = sigmoid(pre_r[i]);
            s.rh[i] = s.r[i] * h[i];
        }
        std::vector<double> pre_c(p + lay.bh, p + lay.bh + H);
        matvec_add(p + lay.wh, H, D, s.x.data(), pre_c.data());
        matvec_add(p + lay.uh, H, H, s.rh.data(), pre_c.data());
        for (int i = 0; i < H; ++i) {
            s.c[i] = std::tanh(pre_c[i]);
            s.h[i] = (1.0 - s.z[i]) * h[i] + s.z[i] * s.c[i];
        }
        h = s.h;

        double u = p[lay.bm] + kernels::active().dot(p + lay.wm, h.data(), H);
        double v = p[lay.ba] + kernels::active().dot(p + lay.wa, h.data(), H);
        s.mu_s = std::exp(std::min(u, 30.0));
        s.v_pre = v;
        s.alpha = softplus(v) + kAlphaFloor;
        loss -= nb_log_likelihood(targets[t], s.mu_s, s.alpha);
    }
    loss /= static_cast<double>(T);
    if (!grad) return loss;

    grad->assign(lay.total, 0.0);
    double* g = grad->data();
    const double inv_t = 1.0 / static_cast<double>(T);

    std::vector<double> dh(H, 0.0);
    std::vector<double> dpre_z(H), dpre_r(H), dpre_c(H), drh(H), tmp(H);
    for (std::size_t ti = T; ti-- > 0;) {
        const StepCache& s = cache[ti];

        // Head gradients: loss = -ll, averaged over the window.
        double dll_dmu, dll_dalpha;
        nb_gradient(targets[ti], s.mu_s, s.alpha, dll_dmu, dll_dalpha);
        double du = -inv_t * dll_dmu * s.mu_s;                    // mu = exp(u)
        double dv = -inv_t * dll_dalpha * sigmoid(s.v_pre);       // softplus'
        kernels::active().axpy(du, p + lay.wm, dh.data(), H);
        kernels::active().axpy(dv, p + lay.wa, dh.data(), H);
        kernels::active().axpy(du, s.h.data(), g + lay.wm, H);
        kernels::active().axpy(dv, s.h.data(), g + lay.wa, H);
        g[lay.bm] += du;
        g[lay.ba] += dv;

        // Through h = (1-z) h_prev + z c.
        std::vector<double> dh_prev(H, 0.0);
        for (int i = 0; i < H; ++i) {
            double dz = dh[i] * (s.c[i] - s.h_prev[i]);
            double dc = dh[i] * s.z[i];
            dh_prev[i] = dh[i] * (1.0 - s.z[i]);
            dpre_c[i] = dc * (1.0 - s.c[i] * s.c[i]);
            dpre_z[i] = dz * s.z[i] * (1.0 - s.z[i]);
        }
        // Candidate path.
        outer_add(g + lay.wh, H, D, dpre_c.data(), s.x.data());
        outer_add(g + lay.uh, H, H, dpre_c.data(), s.rh.data());
        for (int i = 0; i < H; ++i) g[lay.bh + i] += dpre_c[i];
        std::fill(drh.begin(), drh.end(), 0.0);
        matTvec_add(p + lay.uh, H, H, dpre_c.data(), drh.data());
        for (int i = 0; i < H; ++i) {
            dh_prev[i] += drh[i] * s.r[i];
            dpre_r[i] = drh[i] * s.h_prev[i] * s.r[i] * (1.0 - s.r[i]);
        }
        // Reset gate.
        outer_add(g + lay.wr, H, D, dpre_r.data(), s.x.data());
        outer_add(g + lay.ur, H, H, dpre_r.data(), s.h_prev.data());
        for (int i = 0; i < H; ++i) g[lay.br + i] += dpre_r[i];
        matTvec_add(p + lay.ur, H, H, dpre_r.data(), dh_prev.data());
        // Update gate.
        outer_add(g + lay.wz, H, D, dpre_z.data(), s.x.data());
        outer_add(g + lay.uz, H, H, dpre_z.data(), s.h_prev.data());
        for (int i = 0; i < H; ++i) g[lay.bz + i] += dpre_z[i];
        matTvec_add(p + lay.uz, H, H, dpre_z.data(), dh_prev.data());

        dh = std::move(dh_prev);
    }
    return loss;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Window {
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;
};

} // namespace

std::vector<double> RnnForecaster::make_input(double prev_value, double scl,
                                              const std::vector<double>& covariate_row) const {
    std::vector<double> x;
    x.reserve(1 + covariate_names.size());
    x.push_back(prev_value / scl);
    for (std::size_t c = 0; c < covariate_names.size(); ++c) {
        auto [m, s] = covariate_stats.at(covariate_names[c]);
        double raw = c < covariate_row.size() ? covariate_row[c] : m;
        x.push_back(s > 0 ? (raw - m) / s : 0.0);
    }
    return x;
}

double RnnForecaster::series_scale(const std::string& id) const {
    auto it = scale.find(id);
    return it != scale.end() ? it->second : 1.0;
}

RnnForecaster rnn_train(const TimeSeriesSet& data, const RnnConfig& config, std::uint64_t seed) {
    if (data.series.empty()) throw ForecastError("rnn_train: no training series");
    if (config.epochs < 1) throw ForecastError("rnn_train: epochs must be >= 1");
    if (config.hidden_size < 1 || config.horizon < 1)
        throw ForecastError("rnn_train: invalid config");

    RnnForecaster model;
    model.config = config;

    // Per-series scale and covariate statistics over the training range.
    if (config.use_covariates && !data.series.front().covariates.empty()) {
        for (const auto& [name, _] : data.series.front().covariates)
            model.covariate_names.push_back(name);
        for (const auto& name : model.covariate_names) {
            double sum = 0, n = 0;
            for (const auto& s : data.series) {
                const auto& seq = s.covariates.at(name);
                for (double v : seq) sum += v, ++n;
            }
            double mean = sum / n, ss = 0;
            for (const auto& s : data.series)
                for (double v : s.covariates.at(name)) ss += (v - mean) * (v - mean);
            model.covariate_stats[name] = {mean, std::sqrt(ss / std::max(n - 1, 1.0))};
        }
    }
    for (const auto& s : data.series) {
        double mean = std::accumulate(s.values.begin(), s.values.end(), 0.0) / s.values.size();
        model.scale[s.id] = 1.0 + mean;
    }

    const int D = 1 + static_cast<int>(model.covariate_names.size());
    model.net = RnnNet(D, config.hidden_size, substream_seed(seed, 0x1417));

    // Sliding windows from all series jointly.
    const int L = config.effective_context();
    std::vector<Window> windows;
    for (const auto& s : data.series) {
        const int n = static_cast<int>(s.values.size());
        const int len = std::min(L, n);
        const double scl = model.scale.at(s.id);
        for (int start = 0; start + len <= n; start += std::max(1, config.window_stride)) {
            Window w;
            for (int t = start; t < start + len; ++t) {
                double prev = t > 0 ? s.values[t - 1] : 0.0;
                std::vector<double> row;
                for (const auto& name : model.covariate_names)
                    row.push_back(s.covariates.at(name)[t]);
                w.inputs.push_back(model.make_input(prev, scl, row));
                w.targets.push_back(s.values[t] / scl);
            }
            windows.push_back(std::move(w));
        }
    }
    if (windows.empty()) throw ForecastError("rnn_train: series too short for context window");

    // Adam over per-window gradients, seeded shuffle per epoch.
    auto& params = model.net.params();
    std::vector<double> m(params.size(), 0.0), v(params.size(), 0.0), grad;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    long step = 0;
    std::vector<std::size_t> order(windows.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(substream_seed(seed, 0x5aff1e));

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
        double epoch_nll = 0.0;
        for (std::size_t wi : order) {
            double loss = model.net.nll_window(windows[wi].inputs, windows[wi].targets, &grad);
            if (!std::isfinite(loss))
                throw DivergedTraining("rnn_train: non-finite loss at epoch " +
                                       std::to_string(epoch));
            epoch_nll += loss;

            double norm = std::sqrt(
                kernels::active().dot(grad.data(), grad.data(), grad.size()));
            double clip = norm > config.grad_clip ? config.grad_clip / norm : 1.0;
            ++step;
            double bc1 = 1.0 - std::pow(b1, step), bc2 = 1.0 - std::pow(b2, step);
            for (std::size_t i = 0; i < params.size(); ++i) {
                double gi = grad[i] * clip;
                m[i] = b1 * m[i] + (1 - b1) * gi;
                v[i] = b2 * v[i] + (1 - b2) * gi * gi;
                params[i] -= config.learning_rate * (m[i] / bc1) /
                             (std::sqrt(v[i] / bc2) + eps);
            }
        }
        model.epoch_loss.push_back(epoch_nll / windows.size());
    }
    return model;
}

double rnn_gradient_check(const RnnNet& net,
                          const std::vector<std::vector<std::vector<double>>>& input_windows,
                          const std::vector<std::vector<double>>& target_windows, int probes,
                          std::uint64_t seed) {
    RnnNet work = net;
    std::vector<double> grad(work.params().size(), 0.0), analytic(work.params().size(), 0.0);
    for (std::size_t w = 0; w < input_windows.size(); ++w) {
        work.nll_window(input_windows[w], target_windows[w], &grad);
        for (std::size_t i = 0; i < grad.size(); ++i) analytic[i] += grad[i];
    }

    Rng rng(seed);
    const double h = 1e-5;
    double max_rel = 0.0;
    for (int probe = 0; probe < probes; ++probe) {
        std::size_t i = static_cast<std::size_t>(rng.uniform() * work.params().size());
        i = std::min(i, work.params().size() - 1);
        double orig = work.params()[i];
        auto total_loss = [&] {
            double l = 0;
            for (std::size_t w = 0; w < input_windows.size(); ++w)
                l += work.nll_window(input_windows[w], target_windows[w], nullptr);
            return l;
        };
        work.params()[i] = orig + h;
        double lp = total_loss();
        work.params()[i] = orig - h;
        double lm = total_loss();
        work.params()[i] = orig;
        double fd = (lp - lm) / (2 * h);
        double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-6});
        max_rel = std::max(max_rel, std::abs(fd - analytic[i]) / denom);
    }
    return max_rel;
}

// ---------------------------------------------------------------------------
// Single-series adapter

namespace {

class RnnSeriesForecaster final : public Forecaster {
public:
    RnnSeriesForecaster(const RnnForecaster* owner, double scl,
                        std::vector<std::vector<double>> future_covariates)
        : owner_(owner), scale_(scl), covs_(std::move(future_covariates)) {}

    ForecastDistribution predict(std::span<const double> history, int horizon) const override {
        if (history.empty()) throw EmptyHistory("predict: empty history");
        if (horizon < 1) throw ForecastError("predict: horizon must be >= 1");
        std::vector<double> h = condition(history);
        ForecastDistribution dist;
        double prev = history.back();
        for (int k = 0; k < horizon; ++k) {
            std::vector<double> h2(h.size());
            owner_->net.step(input_at(history.size() + k, prev), h, h2);
            h = std::move(h2);
            double mu_s, alpha;
            owner_->net.head(h, mu_s, alpha);
            Marginal m;
            m.kind = Marginal::Kind::NegativeBinomial;
            m.a = mu_s * scale_;
            m.b = alpha;
            dist.marginals.push_back(m);
            prev = m.quantile(0.5);  // median path carries multi-step parameters
        }
        return dist;
    }

    void sample_path(std::span<const double> history, std::span<double> out,
                     Rng& rng) const override {
        std::vector<double> h = condition(history);
        double prev = history.back();
        for (std::size_t k = 0; k < out.size(); ++k) {
            std::vector<double> h2(h.size());
            owner_->net.step(input_at(history.size() + k, prev), h, h2);
            h = std::move(h2);
            double mu_s, alpha;
            owner_->net.head(h, mu_s, alpha);
            double draw = rng.negative_binomial(mu_s * scale_, alpha);
            out[k] = draw;
            prev = draw;
        }
    }

private:
    // Runs the recurrence over the observed history, returning the hidden
    // state after consuming the last observation's input.
    std::vector<double> condition(std::span<const double> history) const {
        std::vector<double> h(owner_->net.hidden(), 0.0);
        std::vector<double> h2(h.size());
        for (std::size_t t = 0; t < history.size(); ++t) {
            double prev = t > 0 ? history[t - 1] : 0.0;
            owner_->net.step(input_at(t, prev), h, h2);
            std::swap(h, h2);
        }
        return h;
    }

    std::vector<double> input_at(std::size_t t, double prev_value) const {
        std::vector<double> row;
        if (t < covs_.size()) row = covs_[t];
        return owner_->make_input(prev_value, scale_, row);
    }

    const RnnForecaster* owner_;
    double scale_;
    std::vector<std::vector<double>> covs_;  // [time][covariate], full index
};

} // namespace

std::shared_ptr<Forecaster> RnnForecaster::series_forecaster(
    const std::string& id, std::vector<std::vector<double>> future_covariates) const {
    return std::make_shared<RnnSeriesForecaster>(this, series_scale(id),
                                                 std::move(future_covariates));
}

} // namespace rollcast
