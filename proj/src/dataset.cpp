#include "rollcast/dataset.hpp"

#include "rollcast/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace rollcast {

void TimeSeries::validate() const {
    if (values.size() < 2)
        throw DatasetError("series '" + id + "': length must be >= 2");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0))
            throw NegativeDemand("series '" + id + "': negative demand at row " +
                                 std::to_string(i));
    }
    for (const auto& [name, seq] : covariates) {
        if (seq.size() != values.size())
            throw RaggedSeries("series '" + id + "': covariate '" + name +
                               "' length mismatch");
    }
}

std::size_t TimeSeriesSet::common_length() const {
    return series.empty() ? 0 : series.front().values.size();
}

const TimeSeries* TimeSeriesSet::find(const std::string& id) const {
    for (const auto& s : series)
        if (s.id == id) return &s;
    return nullptr;
}

void TimeSeriesSet::validate() const {
    if (series.empty()) throw DatasetError("empty dataset");
    std::size_t len = common_length();
    for (const auto& s : series) {
        s.validate();
        if (s.values.size() != len)
            throw RaggedSeries("series '" + s.id + "': length " +
                               std::to_string(s.values.size()) + " vs common " +
                               std::to_string(len));
    }
    if (horizon_start <= 0 || static_cast<std::size_t>(horizon_start) >= len)
        throw DatasetError("horizon_start out of range");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_number(const std::string& cell, const std::string& context) {
    double v;
    auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || p != cell.data() + cell.size())
        throw DatasetError("unparsable number '" + cell + "' in " + context);
    return v;
}

} // namespace

TimeSeriesSet load_dataset(const std::string& path, const CsvFormat& format, int horizon_start) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open dataset file: " + path);

    std::string header;
    if (!std::getline(in, header)) throw DatasetError("empty dataset file: " + path);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    auto cols = split_csv_line(header);

    auto col_index = [&](const std::string& name) {
        auto it = std::find(cols.begin(), cols.end(), name);
        if (it == cols.end()) throw MissingColumn("missing column '" + name + "' in " + path);
        return static_cast<int>(it - cols.begin());
    };
    int id_col = col_index(format.series_id_column);
    int t_col = col_index(format.time_column);
    int d_col = col_index(format.demand_column);

    std::vector<int> cov_cols;
    for (int i = 0; i < static_cast<int>(cols.size()); ++i)
        if (i != id_col && i != t_col && i != d_col) cov_cols.push_back(i);

    struct RawRow {
        long t;
        double demand;
        std::vector<double> covs;
    };
    std::map<std::string, std::vector<RawRow>> rows_by_id;
    std::vector<std::string> id_order;

    std::string line;
    long row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != cols.size())
            throw DatasetError("row " + std::to_string(row_no) + ": expected " +
                               std::to_string(cols.size()) + " cells, got " +
                               std::to_string(cells.size()));
        std::string id = cells[id_col];
        RawRow r;
        r.t = static_cast<long>(parse_number(cells[t_col], "row " + std::to_string(row_no)));
        r.demand = parse_number(cells[d_col], "row " + std::to_string(row_no));
        if (r.demand < 0.0)
            throw NegativeDemand("series '" + id + "': negative demand at row " +
                                 std::to_string(row_no));
        for (int ci : cov_cols) {
            if (cells[ci].empty())
                throw DatasetError("row " + std::to_string(row_no) + ": missing covariate cell '" +
                                   cols[ci] + "'");
            r.covs.push_back(parse_number(cells[ci], "row " + std::to_string(row_no)));
        }
        if (!rows_by_id.count(id)) id_order.push_back(id);
        rows_by_id[id].push_back(std::move(r));
    }

    TimeSeriesSet out;
    std::size_t len = 0;
    for (const auto& id : id_order) {
        auto& rows = rows_by_id[id];
        std::stable_sort(rows.begin(), rows.end(),
                         [](const RawRow& a, const RawRow& b) { return a.t < b.t; });
        TimeSeries ts;
        ts.id = id;
        for (const auto& r : rows) ts.values.push_back(r.demand);
        for (std::size_t ci = 0; ci < cov_cols.size(); ++ci) {
            std::vector<double> seq;
            for (const auto& r : rows) seq.push_back(r.covs[ci]);
            ts.covariates[cols[cov_cols[ci]]] = std::move(seq);
        }
        if (len == 0) len = ts.values.size();
        if (ts.values.size() != len)
            throw RaggedSeries("series '" + id + "': length " +
                               std::to_string(ts.values.size()) + " vs common " +
                               std::to_string(len));
        out.series.push_back(std::move(ts));
    }
    if (out.series.empty()) throw DatasetError("no data rows in " + path);

    out.horizon_start =
        horizon_start >= 0 ? horizon_start : std::max(1, static_cast<int>(len) - 1);
    out.validate();
    return out;
}

void save_dataset(const TimeSeriesSet& data, const std::string& path, const CsvFormat& format) {
    std::ofstream out(path);
    if (!out) throw DatasetError("cannot write dataset file: " + path);
    out.precision(17);

    std::vector<std::string> cov_names;
    if (!data.series.empty())
        for (const auto& [name, _] : data.series.front().covariates) cov_names.push_back(name);

    out << format.series_id_column << "," << format.time_column << "," << format.demand_column;
    for (const auto& n : cov_names) out << "," << n;
    out << "\n";
    for (const auto& s : data.series) {
        for (std::size_t t = 0; t < s.values.size(); ++t) {
            out << s.id << "," << t << "," << s.values[t];
            for (const auto& n : cov_names) out << "," << s.covariates.at(n)[t];
            out << "\n";
        }
    }
}

std::pair<TimeSeriesSet, TruthScenario> split_train_truth(const TimeSeriesSet& data, int T) {
    data.validate();
    if (T < 1) throw HorizonOverrun("T must be >= 1");
    if (static_cast<std::size_t>(data.horizon_start + T) > data.common_length())
        throw HorizonOverrun("horizon_start + T exceeds series length");

    TimeSeriesSet train;
    train.horizon_start = data.horizon_start;
    TruthScenario truth;
    truth.demands.assign(T, std::vector<double>(data.series.size(), 0.0));

    for (std::size_t j = 0; j < data.series.size(); ++j) {
        const auto& s = data.series[j];
        TimeSeries ts;
        ts.id = s.id;
        ts.values.assign(s.values.begin(), s.values.begin() + data.horizon_start);
        for (const auto& [name, seq] : s.covariates)
            ts.covariates[name] = std::vector<double>(seq.begin(), seq.begin() + data.horizon_start);
        train.series.push_back(std::move(ts));
        for (int t = 0; t < T; ++t) truth.demands[t][j] = s.values[data.horizon_start + t];
    }
    return {std::move(train), std::move(truth)};
}

bool MSlagInstance::valid_dims() const {
    auto mat_ok = [&](const std::vector<std::vector<double>>& m) {
        if (static_cast<int>(m.size()) != periods) return false;
        for (const auto& row : m)
            if (static_cast<int>(row.size()) != products) return false;
        return true;
    };
    return periods > 0 && products > 0 && mat_ok(big_m) && mat_ok(inv_capacity) &&
           mat_ok(setup_cost) && mat_ok(backlog_cost) && mat_ok(holding_cost) &&
           static_cast<int>(setup_time.size()) == products &&
           static_cast<int>(unit_time.size()) == products &&
           static_cast<int>(capacity.size()) == periods &&
           static_cast<int>(overtime_bound.size()) == periods &&
           static_cast<int>(overtime_cost.size()) == periods;
}

MSlagInstance generate_instance_params(const TimeSeriesSet& data, const InstanceGenConfig& cfg,
                                       std::uint64_t seed) {
    data.validate();
    if (cfg.capacity_ratio <= 0 || cfg.backlog_ratio <= 0 || cfg.setup_ratio <= 0 ||
        cfg.holding_cost <= 0)
        throw DatasetError("instance generator ratios must be positive");

    const int J = static_cast<int>(data.series.size());
    const int T = cfg.periods > 0
                      ? cfg.periods
                      : static_cast<int>(data.common_length()) - data.horizon_start;
    if (T < 1) throw DatasetError("instance generator: no planning periods");

    // Training demand means drive every scale in the instance.
    std::vector<double> mean(J, 0.0);
    for (int j = 0; j < J; ++j) {
        const auto& v = data.series[j].values;
        mean[j] = std::accumulate(v.begin(), v.begin() + data.horizon_start, 0.0) /
                  data.horizon_start;
    }

    MSlagInstance inst;
    inst.periods = T;
    inst.products = J;

    Rng rng(substream_seed(seed, 0x1157a9ce));
    inst.unit_time.resize(J);
    inst.setup_time.resize(J);
    for (int j = 0; j < J; ++j) inst.unit_time[j] = rng.uniform(1.0, 2.0);
    for (int j = 0; j < J; ++j) inst.setup_time[j] = rng.uniform(5.0, 10.0);

    double mean_load = 0.0;  // mean per-period production time demanded
    for (int j = 0; j < J; ++j) mean_load += inst.unit_time[j] * mean[j];

    inst.capacity.assign(T, cfg.capacity_ratio * mean_load);
    inst.overtime_bound.assign(T, cfg.overtime_ratio * inst.capacity[0]);

    inst.inv_capacity.assign(T, std::vector<double>(J));
    inst.holding_cost.assign(T, std::vector<double>(J));
    inst.backlog_cost.assign(T, std::vector<double>(J));
    inst.setup_cost.assign(T, std::vector<double>(J));
    for (int t = 0; t < T; ++t) {
        for (int j = 0; j < J; ++j) {
            inst.inv_capacity[t][j] = cfg.inventory_ratio * mean[j];
            inst.holding_cost[t][j] = cfg.holding_cost;
            inst.backlog_cost[t][j] = cfg.backlog_ratio * cfg.holding_cost;
            inst.setup_cost[t][j] = cfg.setup_ratio * cfg.holding_cost * mean[j];
        }
    }

    // Overtime cost per time unit: ratio times the holding-cost value of
    // demand produced per unit of production time.
    double total_mean = std::accumulate(mean.begin(), mean.end(), 0.0);
    double value_per_time = mean_load > 0 ? cfg.holding_cost * total_mean / mean_load : 1.0;
    inst.overtime_cost.assign(T, cfg.overtime_cost_ratio * value_per_time);

    // Linking bound from next-period inventory headroom (capacity bound
    // i+ + x <= I_{t+1,j} caps production anyway).
    inst.big_m.assign(T, std::vector<double>(J));
    for (int t = 0; t < T; ++t)
        for (int j = 0; j < J; ++j)
            inst.big_m[t][j] = (t + 1 < T) ? inst.inv_capacity[t + 1][j] : inst.inv_capacity[t][j];

    return inst;
}

} // namespace rollcast
