#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rollcast/rnn.hpp"

#include <cmath>
#include <numeric>

using namespace rollcast;

namespace {

TimeSeriesSet constant_data(double value, int len, int n_series) {
    TimeSeriesSet d;
    for (int j = 0; j < n_series; ++j) {
        TimeSeries s;
        s.id = "s" + std::to_string(j);
        s.values.assign(len, value);
        d.series.push_back(std::move(s));
    }
    d.horizon_start = len - 1;
    return d;
}

RnnConfig tiny_config() {
    RnnConfig cfg;
    cfg.hidden_size = 8;
    cfg.epochs = 40;
    cfg.horizon = 4;
    cfg.context_length = 6;
    return cfg;
}

} // namespace

TEST_CASE("gradient check: analytic BPTT matches finite differences") {
    Rng rng(31);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        RnnNet net(3, 6, seed);
        std::vector<std::vector<std::vector<double>>> inputs;
        std::vector<std::vector<double>> targets;
        for (int w = 0; w < 2; ++w) {
            std::vector<std::vector<double>> win;
            std::vector<double> tgt;
            for (int t = 0; t < 5; ++t) {
                win.push_back({rng.uniform(0, 2), rng.uniform(-1, 1), rng.uniform(-1, 1)});
                tgt.push_back(rng.uniform(0, 3));
            }
            inputs.push_back(std::move(win));
            targets.push_back(std::move(tgt));
        }
        double err = rnn_gradient_check(net, inputs, targets, 40, seed);
        CHECK(err <= 1e-4);
    }
}

TEST_CASE("nll gradient has the right sign at the head bias") {
    // With mu far below the target, pushing the mean bias up must lower the NLL.
    RnnNet net(1, 4, 9);
    std::vector<std::vector<double>> inputs{{1.0}, {1.0}};
    std::vector<double> targets{5.0, 5.0};
    std::vector<double> grad(net.params().size());
    double f0 = net.nll_window(inputs, targets, &grad);
    auto bumped = net;
    for (std::size_t i = 0; i < grad.size(); ++i) bumped.params()[i] -= 1e-3 * grad[i];
    double f1 = bumped.nll_window(inputs, targets, nullptr);
    CHECK(f1 < f0);
}

TEST_CASE("training on a constant series learns the constant") {
    auto data = constant_data(5.0, 40, 2);
    auto model = rnn_train(data, tiny_config(), 17);
    CHECK(model.epoch_loss.size() == 40);
    CHECK(model.epoch_loss.back() <= model.epoch_loss.front());

    auto fc = model.series_forecaster("s0");
    std::vector<double> hist(data.series[0].values.begin(),
                             data.series[0].values.begin() + data.horizon_start);
    auto dist = fc->predict(hist, 4);
    REQUIRE(dist.horizon() == 4);
    for (const auto& m : dist.marginals) {
        CHECK(m.kind == Marginal::Kind::NegativeBinomial);
        CHECK(m.mean() >= 4.5);
        CHECK(m.mean() <= 5.5);
    }
}

TEST_CASE("training is deterministic given the seed") {
    auto data = constant_data(3.0, 30, 1);
    auto cfg = tiny_config();
    cfg.epochs = 10;
    auto a = rnn_train(data, cfg, 99);
    auto b = rnn_train(data, cfg, 99);
    CHECK(a.net.params() == b.net.params());
    CHECK(a.epoch_loss == b.epoch_loss);
    auto c = rnn_train(data, cfg, 100);
    CHECK(a.net.params() != c.net.params());
}

TEST_CASE("per-series scale is one plus the training mean") {
    TimeSeriesSet d;
    d.series.push_back({"lo", std::vector<double>(20, 2.0), {}});
    d.series.push_back({"hi", std::vector<double>(20, 50.0), {}});
    d.horizon_start = 19;
    auto cfg = tiny_config();
    cfg.epochs = 1;
    auto model = rnn_train(d, cfg, 1);
    CHECK(model.series_scale("lo") == doctest::Approx(3.0));
    CHECK(model.series_scale("hi") == doctest::Approx(51.0));
}

TEST_CASE("sampled paths follow the negative binomial head") {
    // Freeze a trained net and compare the sample mean of one-step draws
    // with the predictive mean.
    auto data = constant_data(6.0, 40, 1);
    auto model = rnn_train(data, tiny_config(), 23);
    auto fc = model.series_forecaster("s0");
    std::vector<double> hist(data.series[0].values.begin(),
                             data.series[0].values.begin() + data.horizon_start);
    auto dist = fc->predict(hist, 1);
    double mu = dist.marginals[0].a;
    double alpha = dist.marginals[0].b;
    double var = mu + alpha * mu * mu;

    const int n = 4000;
    auto paths = fc->sample(hist, 1, n, 7);
    double sum = 0;
    for (const auto& p : paths.paths) {
        CHECK(p[0] >= 0.0);
        sum += p[0];
    }
    double sample_mean = sum / n;
    double se = std::sqrt(var / n);
    CHECK(std::abs(sample_mean - mu) <= 4 * se);
}

TEST_CASE("covariates enter the input vector z-scored") {
    TimeSeriesSet d;
    TimeSeries s;
    s.id = "a";
    s.values.assign(30, 4.0);
    s.covariates["promo"] = std::vector<double>(30, 0.0);
    for (int t = 0; t < 30; t += 3) s.covariates["promo"][t] = 1.0;
    d.series.push_back(std::move(s));
    d.horizon_start = 29;

    auto cfg = tiny_config();
    cfg.epochs = 2;
    auto model = rnn_train(d, cfg, 3);
    REQUIRE(model.covariate_names == std::vector<std::string>{"promo"});
    auto [m, sd] = model.covariate_stats.at("promo");
    CHECK(sd > 0);

    auto in = model.make_input(4.0, model.series_scale("a"), {1.0});
    REQUIRE(in.size() == 2);
    CHECK(in[0] == doctest::Approx(4.0 / model.series_scale("a")));
    CHECK(in[1] == doctest::Approx((1.0 - m) / sd));
}

TEST_CASE("use_covariates=false ignores covariate columns") {
    TimeSeriesSet d;
    TimeSeries s;
    s.id = "a";
    s.values.assign(30, 4.0);
    s.covariates["promo"] = std::vector<double>(30, 1.0);
    d.series.push_back(std::move(s));
    d.horizon_start = 29;

    auto cfg = tiny_config();
    cfg.epochs = 1;
    cfg.use_covariates = false;
    auto model = rnn_train(d, cfg, 3);
    CHECK(model.covariate_names.empty());
    CHECK(model.net.input_dim() == 1);
}
