#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "npts/kernels.hpp"
#include "npts/time.hpp"

namespace npts {

/// @brief Exact discrete predictive distribution over the distinct context values.
struct PredictiveDistribution {
    std::vector<double> support; ///< sorted distinct observed values
    std::vector<double> pmf;     ///< probability per support value
    std::vector<double> cdf;     ///< running sum of pmf; last entry is exactly 1

    /// @brief Generalized inverse CDF: smallest support value whose CDF reaches level.
    double quantile(double level) const;
};

/// @brief Aggregates index probabilities by observed value into an exact distribution.
PredictiveDistribution one_step_distribution(std::span<const double> context_values,
                                             const SamplingDistribution& dist);

/// @brief Linear interpolation between order statistics at fractional rank level*(K-1).
double empirical_quantile(std::span<const double> sorted_samples, double level);

/// @brief The 19 evaluation levels 0.05, 0.10, ..., 0.95.
std::vector<double> default_quantile_levels();

/// @brief Source of per-step sampling distributions over a sliding context window.
///
/// A strategy is bound to one series. At each forecast step the caller passes the
/// window holding the values at indices target_index - T .. target_index - 1 of the
/// (observed plus previously predicted) sequence, where T = window_length(target_index).
/// Implementations must not outlive the series they were bound to.
class SamplingStrategy {
public:
    virtual ~SamplingStrategy() = default;

    /// @brief Window length used when `available` observations precede the target.
    virtual std::size_t window_length(std::size_t available) const = 0;

    /// @brief True when the distribution depends on the window values, not just the
    /// calendar position; value-independent distributions are computed once per step
    /// and shared across sample paths.
    virtual bool value_dependent() const = 0;

    /// @brief Distribution over the window's indices for predicting series index
    /// target_index. window_values may be empty when value_dependent() is false.
    virtual SamplingDistribution distribution(std::span<const double> window_values,
                                              std::size_t target_index) const = 0;
};

struct ForecastOptions {
    std::size_t horizon = 1;
    std::size_t num_samples = 100;
    std::uint64_t seed = 0;
    int threads = 1;
    std::vector<double> quantile_levels = default_quantile_levels();
};

struct ForecastResult {
    std::string series_id;
    Timestamp forecast_start{};
    std::size_t horizon = 0;
    /// K sample paths, each of length horizon.
    std::vector<std::vector<double>> samples;
    /// Per quantile level, one value per horizon step, derived from the sorted samples.
    std::map<double, std::vector<double>> quantile_curves;
};

/// @brief Monte Carlo multi-step forecast by autoregressive index sampling.
///
/// Each path starts from the observed series; every predicted value joins that
/// path's context for subsequent steps. Path k uses an rng seeded with
/// options.seed + k, so results do not depend on the thread count.
ForecastResult forecast_paths(const TimeSeries& series, const SamplingStrategy& strategy,
                              const ForecastOptions& options);

} // namespace npts
