#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "npts/rng.hpp"
#include "npts/time.hpp"

namespace npts {

enum class KernelKind {
    Uniform,
    Exponential,
    SeasonalUniform,
    SeasonalExponential,
};

/// @brief Parses "uniform", "exponential", "seasonal-uniform" or "seasonal-exponential".
KernelKind parse_kernel_kind(const std::string& text);

std::string kernel_kind_str(KernelKind kind);

/// @brief Configuration of the categorical kernel that weights context indices.
struct KernelSpec {
    KernelKind kind = KernelKind::Uniform;
    /// Width of the exponential decay; unused by the uniform kinds.
    double lambda = 1.0;
    /// Calendar frequency; the seasonal kinds derive time features from it.
    Frequency freq;
};

/// @brief Categorical distribution over context indices 0..T-1 with a precomputed CDF.
class SamplingDistribution {
public:
    /// @brief Wraps probabilities that must already be normalized (sum to 1 within 1e-9).
    explicit SamplingDistribution(std::vector<double> probabilities);

    /// @brief Normalizes a vector of nonnegative, not-all-zero weights.
    static SamplingDistribution from_weights(std::span<const double> weights);

    const std::vector<double>& probabilities() const { return probabilities_; }
    const std::vector<double>& cdf() const { return cdf_; }
    std::size_t size() const { return probabilities_.size(); }

    /// @brief Draws one index by inverse-CDF transform of a single uniform draw.
    std::size_t sample(Rng& rng) const;

private:
    std::vector<double> probabilities_;
    std::vector<double> cdf_;
};

/// @brief The grid of kernel widths explored during tuning.
std::vector<double> lambda_grid();

/// @brief Builds the sampling distribution over context indices for one target step.
///
/// The exponential kind decays with the integer index offset to the target (the
/// target sits one step after the last context index); the seasonal kinds compare
/// calendar time features instead. The uniform kind ignores the timestamps.
SamplingDistribution kernel_weights(const KernelSpec& spec,
                                    std::span<const Timestamp> context_timestamps,
                                    Timestamp target_timestamp);

} // namespace npts
