#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "npts/models.hpp"
#include "npts/time.hpp"

namespace npts {

/// @brief Pinball loss (level - 1{actual < predicted}) * (actual - predicted).
double quantile_loss(double predicted, double actual, double level);

/// @brief Accumulates quantile losses over (series, step) points for the normalized
/// mean quantile loss: sum of losses / (sum of |actual| * number of levels).
class EvalAccumulator {
public:
    /// @brief Adds one evaluation point: the predicted quantile per level and the actual.
    void add(std::span<const double> levels, std::span<const double> predicted, double actual);

    /// @brief Merges another accumulator (same level count).
    void merge(const EvalAccumulator& other);

    /// @brief The normalized mean quantile loss. When every actual is zero the
    /// normalizer degenerates; the plain mean loss per (point, level) is returned
    /// instead and *unnormalized is set.
    double value(bool* unnormalized = nullptr) const;

    std::size_t points() const { return points_; }
    double loss_sum() const { return loss_sum_; }
    double abs_actual_sum() const { return abs_sum_; }

private:
    double loss_sum_ = 0.0;
    double abs_sum_ = 0.0;
    std::size_t points_ = 0;
    std::size_t levels_ = 0;
};

/// @brief Normalized mean quantile loss over aligned points; see EvalAccumulator.
double mean_quantile_loss(std::span<const double> levels,
                          const std::vector<std::vector<double>>& predicted,
                          std::span<const double> actuals, bool* unnormalized = nullptr);

/// @brief Fraction of actuals at or below their predicted quantile (ties covered).
double coverage(std::span<const double> predicted, std::span<const double> actuals);

struct BacktestPlan {
    std::size_t prediction_length = 1;
    std::size_t num_windows = 1;
    std::vector<double> quantile_levels = default_quantile_levels();
    std::size_t num_samples = 100;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct BacktestReport {
    std::string model_label;
    double mean_loss = 0.0;
    bool unnormalized = false;
    std::vector<std::pair<std::string, double>> per_series_loss;
    std::vector<double> levels;
    std::vector<double> coverage_by_level;
    std::vector<double> calibration_error; ///< |coverage - level| per level
    double wall_seconds = 0.0;             ///< informational; never written to reports
};

/// @brief Deterministic per-(series, window) forecast seed derived from the plan seed.
std::uint64_t forecast_seed(std::uint64_t base, std::size_t series_index, std::size_t window);

/// @brief Rolling-window evaluation of one candidate.
///
/// The final prediction_length * num_windows steps of every series are held out; the
/// candidate is built on the truncated panel, then each window is forecast in sequence
/// with the true values of earlier windows revealed. Losses and coverage pool over all
/// (series, step) pairs.
BacktestReport rolling_backtest(const std::vector<TimeSeries>& panel,
                                const ModelCandidate& candidate, const BacktestPlan& plan);

struct CandidateScore {
    std::string label;
    double score = 0.0;
    bool failed = false;
    std::string error;
};

struct TuneResult {
    std::size_t best_index = 0;
    std::string best_label;
    std::vector<CandidateScore> scores;
};

/// @brief Scores every candidate of the family on the panel's held-out tail and picks
/// the lowest mean quantile loss; ties keep the first-listed candidate. Failing
/// candidates are recorded and skipped.
TuneResult tune(const ModelFamily& family, const std::vector<TimeSeries>& panel,
                const BacktestPlan& plan);

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    std::size_t count = 0;
};

/// @brief Equal-width bins over [min, max] of the values; a zero-width range yields a
/// single unit-width bin centered on the value.
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins);

void write_metrics_csv(const std::string& path, const std::vector<BacktestReport>& reports,
                       const std::string& dataset);
void write_calibration_csv(const std::string& path, const BacktestReport& report);
void write_tune_csv(const std::string& path, const TuneResult& result);
void write_histogram_csv(const std::string& path, const std::vector<HistogramBin>& bins);

} // namespace npts
