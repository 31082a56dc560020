#include "rollcast/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace rollcast {

using nlohmann::json;

std::string ModelFile::to_json() const {
    json j;
    j["type"] = type;
    if (type == "ar1") {
        json m = json::object();
        for (const auto& [id, a] : ar1)
            m[id] = {{"phi", a.phi},
                     {"gamma", a.gamma},
                     {"noise_std", a.noise_std},
                     {"stationary", a.stationary}};
        j["models"] = m;
    } else if (type == "ma") {
        json m = json::object();
        for (const auto& [id, a] : ma)
            m[id] = {{"q", a.q}, {"log_space", a.log_space}, {"residual_std", a.residual_std}};
        j["models"] = m;
    } else if (type == "rnn") {
        const auto& r = *rnn;
        json cfg = {{"hidden_size", r.config.hidden_size},
                    {"epochs", r.config.epochs},
                    {"learning_rate", r.config.learning_rate},
                    {"horizon", r.config.horizon},
                    {"context_length", r.config.context_length},
                    {"window_stride", r.config.window_stride},
                    {"grad_clip", r.config.grad_clip},
                    {"use_covariates", r.config.use_covariates}};
        json stats = json::object();
        for (const auto& [name, ms] : r.covariate_stats)
            stats[name] = {ms.first, ms.second};
        j["config"] = cfg;
        j["input_dim"] = r.net.input_dim();
        j["hidden"] = r.net.hidden();
        j["params"] = r.net.params();
        j["scale"] = r.scale;
        j["covariate_names"] = r.covariate_names;
        j["covariate_stats"] = stats;
        j["epoch_loss"] = r.epoch_loss;
    } else {
        throw ForecastError("unknown model type: " + type);
    }
    return j.dump(2);
}

ModelFile ModelFile::from_json(const std::string& text) {
    json j = json::parse(text);
    ModelFile f;
    f.type = j.at("type").get<std::string>();
    if (f.type == "ar1") {
        for (auto& [id, m] : j.at("models").items()) {
            Ar1Model a;
            a.phi = m.at("phi");
            a.gamma = m.at("gamma");
            a.noise_std = m.at("noise_std");
            a.stationary = m.at("stationary");
            f.ar1[id] = a;
        }
    } else if (f.type == "ma") {
        for (auto& [id, m] : j.at("models").items()) {
            MaModel a;
            a.q = m.at("q");
            a.log_space = m.at("log_space");
            a.residual_std = m.at("residual_std");
            f.ma[id] = a;
        }
    } else if (f.type == "rnn") {
        auto r = std::make_shared<RnnForecaster>();
        const auto& cfg = j.at("config");
        r->config.hidden_size = cfg.at("hidden_size");
        r->config.epochs = cfg.at("epochs");
        r->config.learning_rate = cfg.at("learning_rate");
        r->config.horizon = cfg.at("horizon");
        r->config.context_length = cfg.at("context_length");
        r->config.window_stride = cfg.at("window_stride");
        r->config.grad_clip = cfg.at("grad_clip");
        r->config.use_covariates = cfg.at("use_covariates");
        r->net = RnnNet(j.at("input_dim").get<int>(), j.at("hidden").get<int>(), 0);
        r->net.params() = j.at("params").get<std::vector<double>>();
        r->scale = j.at("scale").get<std::map<std::string, double>>();
        r->covariate_names = j.at("covariate_names").get<std::vector<std::string>>();
        for (auto& [name, ms] : j.at("covariate_stats").items())
            r->covariate_stats[name] = {ms[0].get<double>(), ms[1].get<double>()};
        r->epoch_loss = j.at("epoch_loss").get<std::vector<double>>();
        f.rnn = std::move(r);
    } else {
        throw ForecastError("unknown model type in file: " + f.type);
    }
    return f;
}

void ModelFile::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ForecastError("cannot write model file: " + path);
    out << to_json() << "\n";
}

ModelFile ModelFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ForecastError("cannot open model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

} // namespace rollcast
