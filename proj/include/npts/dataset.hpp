#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "npts/forecaster.hpp"
#include "npts/time.hpp"

namespace npts {

/// @brief Where a dataset lives and how it is to be evaluated.
struct DatasetManifest {
    std::string path;
    Frequency freq;
    std::size_t prediction_length = 1;
    std::size_t num_windows = 1;
};

struct LoadResult {
    std::vector<TimeSeries> series;
    /// One entry per rejected line, each naming the line number.
    std::vector<std::string> errors;
};

/// @brief Reads a line-delimited JSON dataset: one object per line with a string
/// "item_id" (or "id"), a "start" timestamp, a numeric "target" array and an optional
/// "feat_dynamic_real" array of arrays whose rows cover target length +
/// prediction_length steps. Malformed lines are collected, not fatal.
LoadResult load_dataset(const DatasetManifest& manifest);

/// @brief Writes a panel in the same line-delimited format (6 significant digits).
void write_dataset_jsonl(const std::string& path, const std::vector<TimeSeries>& panel);

/// @brief One emitted forecast: quantile curves and optionally the raw sample paths.
struct ForecastRecord {
    std::string series_id;
    Timestamp forecast_start{};
    std::map<double, std::vector<double>> quantiles;
    std::vector<std::vector<double>> samples; ///< empty unless sample emission was requested
};

ForecastRecord to_record(const ForecastResult& result, bool include_samples);

void write_forecasts_jsonl(const std::string& path, const std::vector<ForecastRecord>& records);

/// @brief Reads forecast records back; strict (throws naming the offending line).
std::vector<ForecastRecord> read_forecasts_jsonl(const std::string& path);

} // namespace npts
