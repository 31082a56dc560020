// Experiment runner: fit / forecast / solve / bench / metrics.
//
// Every command reads a JSON config (--config) and derives all randomness
// from explicit seeds, so reports are pure functions of (config, seed).

#include "CLI11.hpp"
#include "json.hpp"

#include "rollcast/dataset.hpp"
#include "rollcast/metrics.hpp"
#include "rollcast/model_io.hpp"
#include "rollcast/rng.hpp"
#include "rollcast/rolling.hpp"
#include "rollcast/rnn.hpp"
#include "rollcast/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rollcast;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return j;
}

void atomic_write(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

CsvFormat csv_format(const json& cfg) {
    CsvFormat f;
    if (!cfg.contains("format")) return f;
    const json& m = cfg.at("format");
    f.series_id_column = m.value("series_id_column", f.series_id_column);
    f.time_column = m.value("time_column", f.time_column);
    f.demand_column = m.value("demand_column", f.demand_column);
    return f;
}

TimeSeriesSet load_from_config(const json& cfg) {
    if (!cfg.contains("dataset")) throw ConfigError("config needs a \"dataset\" section");
    const json& d = cfg.at("dataset");
    if (!d.contains("path")) throw ConfigError("dataset.path missing");
    return load_dataset(d.at("path").get<std::string>(), csv_format(d),
                        d.value("horizon_start", -1));
}

/// Training view: everything before horizon_start, horizon_start pushed to
/// the end so nothing is treated as future.
TimeSeriesSet training_view(const TimeSeriesSet& data) {
    TimeSeriesSet train;
    train.horizon_start = data.horizon_start;
    for (const auto& s : data.series) {
        TimeSeries t;
        t.id = s.id;
        t.values.assign(s.values.begin(), s.values.begin() + data.horizon_start);
        for (const auto& [name, col] : s.covariates)
            t.covariates[name] = std::vector<double>(col.begin(), col.begin() + data.horizon_start);
        train.series.push_back(std::move(t));
    }
    return train;
}

RnnConfig rnn_config(const json& spec) {
    RnnConfig c;
    c.hidden_size = spec.value("hidden_size", c.hidden_size);
    c.epochs = spec.value("epochs", c.epochs);
    c.learning_rate = spec.value("learning_rate", c.learning_rate);
    c.horizon = spec.value("horizon", c.horizon);
    c.context_length = spec.value("context_length", c.context_length);
    c.window_stride = spec.value("window_stride", c.window_stride);
    c.use_covariates = spec.value("use_covariates", c.use_covariates);
    if (c.epochs <= 0) throw ConfigError("rnn: epochs must be positive");
    if (c.hidden_size <= 0) throw ConfigError("rnn: hidden_size must be positive");
    return c;
}

ModelFile fit_from_spec(const TimeSeriesSet& train, const json& spec, std::uint64_t seed) {
    if (!spec.contains("name")) throw ConfigError("forecaster spec needs a \"name\"");
    std::string name = spec.at("name").get<std::string>();
    ModelFile mf;
    if (name == "ar1") {
        mf.type = "ar1";
        for (const auto& s : train.series) mf.ar1[s.id] = fit_ar1(s.values);
    } else if (name == "ma" || name == "logma") {
        mf.type = "ma";
        int q = spec.value("q", 4);
        bool log_space = name == "logma" || spec.value("log_space", false);
        for (const auto& s : train.series) mf.ma[s.id] = fit_ma(s.values, q, log_space);
    } else if (name == "rnn") {
        mf.type = "rnn";
        mf.rnn = std::make_shared<RnnForecaster>(rnn_train(train, rnn_config(spec), seed));
    } else {
        throw ConfigError("unknown forecaster: " + name);
    }
    return mf;
}

std::shared_ptr<Forecaster> series_model(const ModelFile& mf, const std::string& id) {
    if (mf.type == "ar1") return std::make_shared<Ar1Model>(mf.ar1.at(id));
    if (mf.type == "ma") return std::make_shared<MaModel>(mf.ma.at(id));
    return mf.rnn->series_forecaster(id);
}

PolicyConfig policy_from_spec(const json& spec, const json& solver) {
    PolicyConfig cfg;
    std::string name = spec.at("name").get<std::string>();
    if (name == "deterministic") cfg.policy = PolicyKind::Deterministic;
    else if (name == "two_stage") cfg.policy = PolicyKind::TwoStage;
    else if (name == "robust") cfg.policy = PolicyKind::Robust;
    else throw ConfigError("unknown policy: " + name);
    cfg.scenario_count = spec.value("scenarios", cfg.scenario_count);
    cfg.confidence = spec.value("confidence", cfg.confidence);
    if (cfg.scenario_count < 1) throw ConfigError("two_stage: scenarios must be >= 1");
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0))
        throw ConfigError("robust: confidence must be in (0,1)");
    cfg.solver.abs_gap = solver.value("abs_gap", cfg.solver.abs_gap);
    cfg.solver.node_limit = solver.value("node_limit", cfg.solver.node_limit);
    cfg.solver.time_limit_sec = solver.value("time_limit_sec", cfg.solver.time_limit_sec);
    return cfg;
}

InstanceGenConfig gen_config(const json& cfg, int T) {
    InstanceGenConfig g;
    g.periods = T;
    if (!cfg.contains("instance")) return g;
    const json& i = cfg.at("instance");
    g.capacity_ratio = i.value("capacity_ratio", g.capacity_ratio);
    g.inventory_ratio = i.value("inventory_ratio", g.inventory_ratio);
    g.overtime_ratio = i.value("overtime_ratio", g.overtime_ratio);
    g.holding_cost = i.value("holding_cost", g.holding_cost);
    g.backlog_ratio = i.value("backlog_ratio", g.backlog_ratio);
    g.setup_ratio = i.value("setup_ratio", g.setup_ratio);
    g.overtime_cost_ratio = i.value("overtime_cost_ratio", g.overtime_cost_ratio);
    return g;
}

TimeSeriesSet subset(const TimeSeriesSet& data, const std::vector<std::string>& ids) {
    TimeSeriesSet out;
    out.horizon_start = data.horizon_start;
    for (const auto& id : ids) {
        const TimeSeries* s = data.find(id);
        if (!s) throw ConfigError("group references unknown series: " + id);
        out.series.push_back(*s);
    }
    return out;
}

double path_sum_quantile(const SamplePaths& paths, double rho) {
    std::vector<double> sums;
    sums.reserve(paths.paths.size());
    for (const auto& p : paths.paths) {
        double z = 0.0;
        for (double v : p) z += v;
        sums.push_back(z);
    }
    std::sort(sums.begin(), sums.end());
    auto idx = static_cast<std::size_t>(std::ceil(rho * sums.size())) - 1;
    return sums[std::min(idx, sums.size() - 1)];
}

// ---------------------------------------------------------------------------
// fit

int cmd_fit(const json& cfg, const std::string& out, std::optional<std::uint64_t> seed) {
    auto data = load_from_config(cfg);
    auto train = training_view(data);
    if (!cfg.contains("forecaster")) throw ConfigError("config needs a \"forecaster\" section");
    std::uint64_t s = seed.value_or(cfg.value("seed", 0));
    ModelFile mf = fit_from_spec(train, cfg.at("forecaster"), s);
    mf.save(out);
    std::printf("fit %s -> %s (%zu series)\n", mf.type.c_str(), out.c_str(),
                train.series.size());
    return 0;
}

// ---------------------------------------------------------------------------
// forecast

int cmd_forecast(const json& cfg, const std::string& out) {
    auto data = load_from_config(cfg);
    auto train = training_view(data);
    if (!cfg.contains("model")) throw ConfigError("config needs \"model\": path to a fitted file");
    ModelFile mf = ModelFile::load(cfg.at("model").get<std::string>());
    int horizon = cfg.value("horizon", 1);
    if (horizon < 1) throw ConfigError("horizon must be positive");
    std::vector<double> levels = cfg.value("quantiles", std::vector<double>{0.5, 0.9});

    json report;
    report["horizon"] = horizon;
    for (const auto& s : train.series) {
        auto model = series_model(mf, s.id);
        auto dist = model->predict(s.values, horizon);
        json entry;
        std::vector<double> means;
        for (const auto& m : dist.marginals) means.push_back(m.mean());
        entry["mean"] = means;
        for (double rho : levels) entry["q" + fmt(rho)] = quantile(dist, rho);
        report["series"][s.id] = std::move(entry);
    }
    atomic_write(out, report.dump(2) + "\n");
    std::printf("forecast -> %s\n", out.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// solve

int cmd_solve(const json& cfg, const std::string& out,
              std::optional<std::uint64_t> seed_override) {
    auto data = load_from_config(cfg);
    std::uint64_t seed = seed_override.value_or(cfg.value("seed", 0));
    int T = cfg.value("T", 0);
    if (T < 1) throw ConfigError("config needs \"T\" >= 1");
    auto inst = generate_instance_params(data, gen_config(cfg, T), seed);
    auto [train, truth] = split_train_truth(data, T);

    if (!cfg.contains("scenario_file")) throw ConfigError("config needs \"scenario_file\"");
    std::string spath = cfg.at("scenario_file").get<std::string>();
    std::ifstream sin(spath);
    if (!sin) throw ConfigError("cannot open scenario file: " + spath);
    ScenarioSet set = read_scenario_set_csv(sin);

    PolicyConfig pol = policy_from_spec(cfg.value("policy", json{{"name", "deterministic"}}),
                                        cfg.value("solver", json::object()));
    auto state = SystemState::zero(inst.products);
    const auto& current = truth.demands.at(0);
    MILPModel model = pol.policy == PolicyKind::TwoStage
                          ? build_two_stage(inst, state, current, set)
                          : build_deterministic(inst, state, current, set.scenarios.at(0));
    auto sol = solve_milp(model, pol.solver);

    json report;
    report["status"] = static_cast<int>(sol.status);
    report["objective"] = sol.objective;
    report["bound"] = sol.bound;
    report["nodes"] = sol.nodes;
    if (sol.status == MILPStatus::Optimal) {
        auto dec = extract_first_stage(model, sol);
        report["first_stage"] = {{"production", dec.production},
                                 {"setup", dec.setup},
                                 {"overtime", dec.overtime}};
    }
    std::printf("status=%d objective=%s nodes=%lld\n", static_cast<int>(sol.status),
                fmt(sol.objective).c_str(), static_cast<long long>(sol.nodes));
    if (!out.empty()) atomic_write(out, report.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchCell {
    std::string group;
    int T = 0;
    json forecaster;
    json policy;
    std::uint64_t seed = 0;
};

struct BenchResult {
    bool ok = false;
    std::string error;
    double policy_cost = 0.0;
    double pi_cost = 0.0;
    double gap = 0.0;
    std::int64_t nodes = 0;
    std::vector<double> nd_table;
    std::map<std::string, double> rho_risk;
};

std::string cell_tag(const BenchCell& c) {
    return c.group + "_T" + std::to_string(c.T) + "_" +
           c.policy.at("name").get<std::string>() + "_" +
           c.forecaster.at("name").get<std::string>() + "_s" + std::to_string(c.seed);
}

BenchResult run_cell(const json& cfg, const TimeSeriesSet& data,
                     const std::map<std::string, std::vector<std::string>>& groups,
                     const BenchCell& cell, const fs::path& out_dir) {
    BenchResult r;
    auto group_data = subset(data, groups.at(cell.group));
    auto inst = generate_instance_params(group_data, gen_config(cfg, cell.T), cell.seed);
    auto [train, truth] = split_train_truth(group_data, cell.T);

    ModelFile mf = fit_from_spec(train, cell.forecaster, cell.seed);
    ForecasterGroup fg;
    for (const auto& s : train.series) {
        fg.models.push_back(series_model(mf, s.id));
        fg.histories.push_back(s.values);
    }

    PolicyConfig pol = policy_from_spec(cell.policy, cfg.value("solver", json::object()));
    pol.seed = cell.seed;
    auto trace = run_rolling_horizon(inst, truth, fg, pol);
    if (trace.aborted) throw std::runtime_error("trace aborted: " + trace.abort_reason);

    auto pi = solve_milp(build_perfect_information(inst, SystemState::zero(inst.products), truth),
                         pol.solver);
    if (pi.status != MILPStatus::Optimal) throw std::runtime_error("PI bound did not solve");

    r.policy_cost = trace.total_cost;
    r.pi_cost = pi.objective;
    r.gap = gap_percent(trace.total_cost, pi.objective);
    for (const auto& step : trace.steps) r.nodes += step.nodes;

    // ND of the predicted median over the remaining horizon, one entry per
    // conditioning step.
    for (int t = 0; t < cell.T; ++t) {
        std::vector<std::vector<double>> rest(truth.demands.begin() + t, truth.demands.end());
        std::vector<std::vector<double>> med(rest.size(),
                                             std::vector<double>(inst.products, 0.0));
        for (int j = 0; j < inst.products; ++j) {
            std::vector<double> hist = train.series[j].values;
            for (int u = 0; u < t; ++u) hist.push_back(truth.demands[u][j]);
            auto q = quantile(fg.models[j]->predict(hist, cell.T - t), 0.5);
            for (std::size_t k = 0; k < q.size(); ++k) med[k][j] = q[k];
        }
        r.nd_table.push_back(nd(rest, med));
    }

    // rho-risk of the horizon sum at step 0, quantiles from sampled paths.
    for (double rho : {0.5, 0.9}) {
        std::vector<std::pair<double, double>> pairs;
        for (int j = 0; j < inst.products; ++j) {
            auto paths = fg.models[j]->sample(train.series[j].values, cell.T, 1000,
                                              substream_seed(cell.seed, 7000 + j));
            double z = 0.0;
            for (int t = 0; t < cell.T; ++t) z += truth.demands[t][j];
            pairs.emplace_back(z, path_sum_quantile(paths, rho));
        }
        r.rho_risk[fmt(rho)] = rho_risk_aggregate(rho, pairs);
    }

    MetricReport rep;
    rep.nd_table = r.nd_table;
    rep.rho_risk = r.rho_risk;
    rep.gap_percent = r.gap;
    rep.metadata["group"] = cell.group;
    rep.metadata["T"] = std::to_string(cell.T);
    rep.metadata["policy"] = cell.policy.at("name").get<std::string>();
    rep.metadata["forecaster"] = cell.forecaster.at("name").get<std::string>();
    rep.metadata["seed"] = std::to_string(cell.seed);
    rep.metadata["policy_cost"] = fmt(r.policy_cost);
    rep.metadata["pi_cost"] = fmt(r.pi_cost);
    rep.metadata["nodes"] = std::to_string(r.nodes);
    atomic_write(out_dir / ("run_" + cell_tag(cell) + ".json"), rep.to_json() + "\n");
    r.ok = true;
    return r;
}

struct Aggregate {
    double mean = 0.0, min = 0.0, max = 0.0, stddev = 0.0;
    int runs = 0;
};

Aggregate aggregate(const std::vector<double>& v) {
    Aggregate a;
    a.runs = static_cast<int>(v.size());
    if (v.empty()) return a;
    a.min = *std::min_element(v.begin(), v.end());
    a.max = *std::max_element(v.begin(), v.end());
    for (double x : v) a.mean += x;
    a.mean /= a.runs;
    for (double x : v) a.stddev += (x - a.mean) * (x - a.mean);
    a.stddev = std::sqrt(a.stddev / a.runs);
    return a;
}

int cmd_bench(const json& cfg, const std::string& out_override, int workers,
              std::optional<std::uint64_t> seed_override) {
    auto data = load_from_config(cfg);

    std::map<std::string, std::vector<std::string>> groups;
    if (cfg.contains("groups")) {
        groups = cfg.at("groups").get<std::map<std::string, std::vector<std::string>>>();
    } else {
        std::vector<std::string> all;
        for (const auto& s : data.series) all.push_back(s.id);
        groups["all"] = std::move(all);
    }
    std::vector<int> horizons = cfg.value("horizons", std::vector<int>{});
    if (horizons.empty()) throw ConfigError("config needs nonempty \"horizons\"");
    int avail = static_cast<int>(data.common_length()) - data.horizon_start;
    for (int T : horizons)
        if (T < 1 || T > avail) throw ConfigError("T=" + std::to_string(T) + " exceeds truth length");
    if (!cfg.contains("forecasters") || !cfg.contains("policies"))
        throw ConfigError("config needs \"forecasters\" and \"policies\" lists");
    std::vector<std::uint64_t> seeds =
        seed_override ? std::vector<std::uint64_t>{*seed_override}
                      : cfg.value("seeds", std::vector<std::uint64_t>{0});

    fs::path out_dir = out_override.empty() ? cfg.value("out_dir", "reports") : out_override;
    fs::create_directories(out_dir);

    std::vector<BenchCell> cells;
    for (const auto& [gname, ids] : groups)
        for (int T : horizons)
            for (const auto& f : cfg.at("forecasters"))
                for (const auto& p : cfg.at("policies"))
                    for (std::uint64_t s : seeds) cells.push_back({gname, T, f, p, s});

    std::vector<BenchResult> results(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
            try {
                results[i] = run_cell(cfg, data, groups, cells[i], out_dir);
            } catch (const std::exception& e) {
                results[i].error = e.what();
            }
        }
    };
    workers = std::max(1, workers);
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    // Aggregate Gap% per (group, T, policy, forecaster) cell.
    std::map<std::string, std::vector<double>> gap_by_cell;
    std::map<std::string, std::vector<std::vector<double>>> nd_by_cell;
    int failures = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        if (!results[i].ok) {
            ++failures;
            std::fprintf(stderr, "FAILED %s: %s\n", cell_tag(c).c_str(),
                         results[i].error.c_str());
            continue;
        }
        std::string key = c.group + "," + std::to_string(c.T) + "," +
                          c.policy.at("name").get<std::string>() + "," +
                          c.forecaster.at("name").get<std::string>();
        gap_by_cell[key].push_back(results[i].gap);
        nd_by_cell[key].push_back(results[i].nd_table);
    }

    std::ostringstream gap_csv;
    gap_csv << "group,T,policy,forecaster,mean_gap,min_gap,max_gap,std_gap,runs\n";
    for (const auto& [key, gaps] : gap_by_cell) {
        auto a = aggregate(gaps);
        gap_csv << key << ',' << fmt(a.mean) << ',' << fmt(a.min) << ',' << fmt(a.max) << ','
                << fmt(a.stddev) << ',' << a.runs << '\n';
    }
    atomic_write(out_dir / "gap_summary.csv", gap_csv.str());

    std::ostringstream nd_csv;
    nd_csv << "group,T,policy,forecaster";
    int max_t = *std::max_element(horizons.begin(), horizons.end());
    for (int t = 0; t < max_t; ++t) nd_csv << ",t" << t;
    nd_csv << '\n';
    for (const auto& [key, tables] : nd_by_cell) {
        nd_csv << key;
        std::size_t width = tables.front().size();
        for (std::size_t t = 0; t < width; ++t) {
            double m = 0.0;
            for (const auto& tab : tables) m += tab[t];
            nd_csv << ',' << fmt(m / tables.size());
        }
        nd_csv << '\n';
    }
    atomic_write(out_dir / "nd_table.csv", nd_csv.str());

    std::printf("bench: %zu runs, %d failed -> %s\n", cells.size(), failures,
                out_dir.string().c_str());
    return failures == 0 ? 0 : 2;
}

// ---------------------------------------------------------------------------
// metrics: re-derive the aggregate CSV from the per-run JSON files.

int cmd_metrics(const json& cfg, const std::string& out_override) {
    fs::path dir = cfg.value("report_dir", "reports");
    if (!fs::is_directory(dir)) throw ConfigError("report_dir is not a directory: " + dir.string());

    std::map<std::string, std::vector<double>> gap_by_cell;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        auto name = e.path().filename().string();
        if (name.rfind("run_", 0) == 0 && e.path().extension() == ".json")
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
        std::ifstream in(p);
        json j;
        in >> j;
        const auto& m = j.at("metadata");
        std::string key = m.at("group").get<std::string>() + "," +
                          m.at("T").get<std::string>() + "," +
                          m.at("policy").get<std::string>() + "," +
                          m.at("forecaster").get<std::string>();
        gap_by_cell[key].push_back(j.at("gap_percent").get<double>());
    }
    if (gap_by_cell.empty()) throw ConfigError("no run_*.json files in " + dir.string());

    std::ostringstream csv;
    csv << "group,T,policy,forecaster,mean_gap,min_gap,max_gap,std_gap,runs\n";
    for (const auto& [key, gaps] : gap_by_cell) {
        auto a = aggregate(gaps);
        csv << key << ',' << fmt(a.mean) << ',' << fmt(a.min) << ',' << fmt(a.max) << ','
            << fmt(a.stddev) << ',' << a.runs << '\n';
    }
    fs::path out = out_override.empty() ? dir / "gap_summary.csv" : fs::path(out_override);
    atomic_write(out, csv.str());
    std::printf("%s", csv.str().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rollcast: probabilistic forecasting + look-ahead lot-sizing policies"};
    app.require_subcommand(1);

    std::string config_path, out;
    std::optional<std::uint64_t> seed;
    int workers = 1;

    auto add_common = [&](CLI::App* sub, bool need_out) {
        sub->add_option("--config", config_path, "JSON experiment config")->required();
        auto* o = sub->add_option("--out", out, "output path");
        if (need_out) o->required();
        sub->add_option("--seed", seed, "seed override");
        sub->add_option("--workers", workers, "concurrent sweep cells");
    };
    add_common(app.add_subcommand("fit", "fit a forecaster, write a model file"), true);
    add_common(app.add_subcommand("forecast", "predict from a fitted model file"), true);
    add_common(app.add_subcommand("solve", "build and solve one look-ahead model"), false);
    add_common(app.add_subcommand("bench", "run the rolling-horizon sweep"), false);
    add_common(app.add_subcommand("metrics", "re-derive aggregates from per-run reports"), false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        json cfg = load_config(config_path);
        if (app.got_subcommand("fit")) return cmd_fit(cfg, out, seed);
        if (app.got_subcommand("forecast")) return cmd_forecast(cfg, out);
        if (app.got_subcommand("solve")) return cmd_solve(cfg, out, seed);
        if (app.got_subcommand("bench")) return cmd_bench(cfg, out, workers, seed);
        return cmd_metrics(cfg, out);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const DatasetError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
