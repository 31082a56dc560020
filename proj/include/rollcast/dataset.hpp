#pragma once

#include "rollcast/instance.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rollcast {

struct DatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingColumn : DatasetError { using DatasetError::DatasetError; };
struct NegativeDemand : DatasetError { using DatasetError::DatasetError; };
struct RaggedSeries : DatasetError { using DatasetError::DatasetError; };
struct HorizonOverrun : DatasetError { using DatasetError::DatasetError; };

/// One demand series plus optional covariate sequences of the same length.
struct TimeSeries {
    std::string id;
    std::vector<double> values;
    std::map<std::string, std::vector<double>> covariates;

    void validate() const;

    bool operator==(const TimeSeries&) const = default;
};

/// Series sharing one time index; horizon_start marks the first
/// planning-horizon period.
struct TimeSeriesSet {
    std::vector<TimeSeries> series;
    int horizon_start = 0;

    std::size_t common_length() const;
    const TimeSeries* find(const std::string& id) const;
    void validate() const;

    bool operator==(const TimeSeriesSet&) const = default;
};

/// Realized demand over the planning horizon, [period][product].
struct TruthScenario {
    std::vector<std::vector<double>> demands;

    int periods() const { return static_cast<int>(demands.size()); }
    int products() const { return demands.empty() ? 0 : static_cast<int>(demands[0].size()); }
};

/// Column mapping for the CSV dataset format. Any column not listed here
/// is read as a covariate.
struct CsvFormat {
    std::string series_id_column = "series_id";
    std::string time_column = "t";
    std::string demand_column = "demand";
};

TimeSeriesSet load_dataset(const std::string& path, const CsvFormat& format = {},
                           int horizon_start = -1);
void save_dataset(const TimeSeriesSet& data, const std::string& path, const CsvFormat& format = {});

/// Splits off the first T planning-horizon periods as the truth; the
/// returned training set holds everything before horizon_start.
std::pair<TimeSeriesSet, TruthScenario> split_train_truth(const TimeSeriesSet& data, int T);

/// Ratios used to derive a complete instance from training demand means.
struct InstanceGenConfig {
    int periods = 0;  // 0 = common length - horizon_start
    double capacity_ratio = 1.0;
    double inventory_ratio = 4.0;
    double overtime_ratio = 0.5;
    double holding_cost = 1.0;
    double backlog_ratio = 5.0;
    double setup_ratio = 50.0;
    double overtime_cost_ratio = 2.0;
};

/// Deterministic instance generation: per product, TB_j ~ U[1,2] and
/// TS_j ~ U[5,10] from the seed; capacities and costs scale off training
/// demand means by the config ratios. Pure in (data, config, seed).
MSlagInstance generate_instance_params(const TimeSeriesSet& data, const InstanceGenConfig& config,
                                       std::uint64_t seed);

} // namespace rollcast
