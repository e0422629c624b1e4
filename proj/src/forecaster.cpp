#include "npts/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "npts/parallel.hpp"

namespace npts {

double PredictiveDistribution::quantile(double level) const {
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("quantile level must lie in (0, 1), got " +
                                    std::to_string(level));
    }
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), level);
    if (it == cdf.end()) {
        return support.back();
    }
    return support[static_cast<std::size_t>(it - cdf.begin())];
}

PredictiveDistribution one_step_distribution(std::span<const double> context_values,
                                             const SamplingDistribution& dist) {
    if (context_values.size() != dist.size()) {
        throw std::invalid_argument("context length " + std::to_string(context_values.size()) +
                                    " does not match distribution length " +
                                    std::to_string(dist.size()));
    }
    std::vector<std::size_t> order(context_values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return context_values[a] < context_values[b];
    });

    PredictiveDistribution out;
    const std::vector<double>& probs = dist.probabilities();
    for (std::size_t i : order) {
        const double v = context_values[i];
        if (!out.support.empty() && out.support.back() == v) {
            out.pmf.back() += probs[i];
        } else {
            out.support.push_back(v);
            out.pmf.push_back(probs[i]);
        }
    }
    out.cdf.resize(out.pmf.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < out.pmf.size(); ++i) {
        acc += out.pmf[i];
        out.cdf[i] = acc;
    }
    out.cdf.back() = 1.0;
    return out;
}

double empirical_quantile(std::span<const double> sorted_samples, double level) {
    if (sorted_samples.empty()) {
        throw std::invalid_argument("empty sample vector");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("quantile level must lie in (0, 1), got " +
                                    std::to_string(level));
    }
    const double rank = level * static_cast<double>(sorted_samples.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    const double frac = rank - static_cast<double>(lo);
    if (lo + 1 >= sorted_samples.size()) {
        return sorted_samples.back();
    }
    return sorted_samples[lo] + frac * (sorted_samples[lo + 1] - sorted_samples[lo]);
}

std::vector<double> default_quantile_levels() {
    std::vector<double> levels;
    levels.reserve(19);
    for (int k = 1; k <= 19; ++k) {
        levels.push_back(static_cast<double>(5 * k) / 100.0);
    }
    return levels;
}

namespace {

std::size_t checked_window_length(const SamplingStrategy& strategy, std::size_t available,
                                  const std::string& series_id) {
    const std::size_t len = strategy.window_length(available);
    if (len == 0 || len > available) {
        throw std::runtime_error("strategy requested window of length " + std::to_string(len) +
                                 " with " + std::to_string(available) +
                                 " values available for series '" + series_id + "'");
    }
    return len;
}

} // namespace

ForecastResult forecast_paths(const TimeSeries& series, const SamplingStrategy& strategy,
                              const ForecastOptions& options) {
    const std::size_t length = series.length();
    if (length == 0) {
        throw std::invalid_argument("cannot forecast empty series '" + series.id + "'");
    }
    if (options.horizon < 1) {
        throw std::invalid_argument("forecast horizon must be >= 1");
    }
    if (options.num_samples < 1) {
        throw std::invalid_argument("sample count must be >= 1");
    }
    const std::size_t horizon = options.horizon;
    const std::size_t num_samples = options.num_samples;

    // Value-independent distributions depend only on the calendar position of the
    // step, so they are computed once here and shared across all sample paths.
    std::vector<SamplingDistribution> shared;
    if (!strategy.value_dependent()) {
        shared.reserve(horizon);
        for (std::size_t h = 0; h < horizon; ++h) {
            const std::size_t target_index = length + h;
            checked_window_length(strategy, target_index, series.id);
            try {
                shared.push_back(strategy.distribution({}, target_index));
            } catch (const std::exception& e) {
                throw std::runtime_error("forecast failed for series '" + series.id + "' at step " +
                                         std::to_string(h + 1) + ": " + e.what());
            }
        }
    }

    ForecastResult result;
    result.series_id = series.id;
    result.forecast_start = timestamp_at(series, length);
    result.horizon = horizon;
    result.samples.assign(num_samples, std::vector<double>(horizon, 0.0));

    parallel_for(num_samples, options.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> extended;
        for (std::size_t k = begin; k < end; ++k) {
            Rng rng(options.seed + k);
            extended.assign(series.values.begin(), series.values.end());
            extended.reserve(length + horizon);
            for (std::size_t h = 0; h < horizon; ++h) {
                const std::size_t target_index = length + h;
                const std::size_t window = checked_window_length(strategy, target_index, series.id);
                const std::span<const double> window_values =
                    std::span<const double>(extended).subspan(target_index - window, window);
                std::size_t picked = 0;
                if (strategy.value_dependent()) {
                    try {
                        picked = strategy.distribution(window_values, target_index).sample(rng);
                    } catch (const std::exception& e) {
                        throw std::runtime_error("forecast failed for series '" + series.id +
                                                 "' at step " + std::to_string(h + 1) + " (path " +
                                                 std::to_string(k) + "): " + e.what());
                    }
                } else {
                    picked = shared[h].sample(rng);
                }
                if (picked >= window_values.size()) {
                    throw std::runtime_error("sampled index out of window for series '" +
                                             series.id + "'");
                }
                const double value = window_values[picked];
                extended.push_back(value);
                result.samples[k][h] = value;
            }
        }
    });

    std::vector<double> column(num_samples);
    std::vector<std::vector<double>> sorted_columns(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        for (std::size_t k = 0; k < num_samples; ++k) {
            column[k] = result.samples[k][h];
        }
        std::sort(column.begin(), column.end());
        sorted_columns[h] = column;
    }
    for (double level : options.quantile_levels) {
        std::vector<double> curve(horizon);
        for (std::size_t h = 0; h < horizon; ++h) {
            curve[h] = empirical_quantile(sorted_columns[h], level);
        }
        result.quantile_curves[level] = std::move(curve);
    }
    return result;
}

} // namespace npts
