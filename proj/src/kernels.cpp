#include "npts/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace npts {

KernelKind parse_kernel_kind(const std::string& text) {
    if (text == "uniform") return KernelKind::Uniform;
    if (text == "exponential") return KernelKind::Exponential;
    if (text == "seasonal-uniform") return KernelKind::SeasonalUniform;
    if (text == "seasonal-exponential") return KernelKind::SeasonalExponential;
    throw std::invalid_argument("unrecognized kernel kind: " + text);
}

std::string kernel_kind_str(KernelKind kind) {
    switch (kind) {
        case KernelKind::Uniform: return "uniform";
        case KernelKind::Exponential: return "exponential";
        case KernelKind::SeasonalUniform: return "seasonal-uniform";
        case KernelKind::SeasonalExponential: return "seasonal-exponential";
    }
    throw std::logic_error("unreachable kernel kind");
}

SamplingDistribution::SamplingDistribution(std::vector<double> probabilities)
    : probabilities_(std::move(probabilities)) {
    if (probabilities_.empty()) {
        throw std::invalid_argument("empty sampling distribution");
    }
    double sum = 0.0;
    for (double p : probabilities_) {
        if (!std::isfinite(p) || p < 0.0) {
            throw std::invalid_argument("sampling probabilities must be finite and nonnegative");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("sampling probabilities must sum to 1, got " +
                                    std::to_string(sum));
    }
    cdf_.resize(probabilities_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probabilities_.size(); ++i) {
        acc += probabilities_[i];
        cdf_[i] = acc;
    }
    cdf_.back() = 1.0;
}

SamplingDistribution SamplingDistribution::from_weights(std::span<const double> weights) {
    if (weights.empty()) {
        throw std::invalid_argument("empty weight vector");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) {
            throw std::invalid_argument("kernel weights must be finite and nonnegative");
        }
        sum += w;
    }
    if (sum <= 0.0) {
        throw std::invalid_argument("kernel weights sum to zero");
    }
    std::vector<double> probs(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        probs[i] = weights[i] / sum;
    }
    // Renormalize once more so the constructor's 1e-9 check always holds.
    double psum = 0.0;
    for (double p : probs) psum += p;
    for (double& p : probs) p /= psum;
    return SamplingDistribution(std::move(probs));
}

std::size_t SamplingDistribution::sample(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) {
        return cdf_.size() - 1;
    }
    return static_cast<std::size_t>(it - cdf_.begin());
}

std::vector<double> lambda_grid() {
    return {1.0, 0.75, 0.5, 0.25, 0.1};
}

namespace {

void check_lambda(double lambda) {
    if (!std::isfinite(lambda) || lambda <= 0.0) {
        throw std::invalid_argument("kernel lambda must be finite and positive, got " +
                                    std::to_string(lambda));
    }
}

std::vector<double> feature_distances(const KernelSpec& spec,
                                      std::span<const Timestamp> context_timestamps,
                                      Timestamp target_timestamp) {
    const std::vector<double> target_features = time_features(spec.freq, target_timestamp);
    std::vector<double> dist(context_timestamps.size());
    for (std::size_t i = 0; i < context_timestamps.size(); ++i) {
        const std::vector<double> f = time_features(spec.freq, context_timestamps[i]);
        dist[i] = feature_distance(f, target_features);
    }
    return dist;
}

} // namespace

SamplingDistribution kernel_weights(const KernelSpec& spec,
                                    std::span<const Timestamp> context_timestamps,
                                    Timestamp target_timestamp) {
    const std::size_t n = context_timestamps.size();
    if (n == 0) {
        throw std::invalid_argument("empty context");
    }
    for (Timestamp ts : context_timestamps) {
        if (!(ts < target_timestamp)) {
            throw std::invalid_argument("target timestamp must lie strictly after the context");
        }
    }
    switch (spec.kind) {
        case KernelKind::Uniform: {
            std::vector<double> probs(n, 1.0 / static_cast<double>(n));
            return SamplingDistribution(std::move(probs));
        }
        case KernelKind::Exponential: {
            check_lambda(spec.lambda);
            // Offset of index i to the target is n - i; subtracting the minimum
            // offset (1, the most recent point) keeps the largest weight at exp(0)
            // so large lambda*n cannot underflow the whole vector.
            std::vector<double> weights(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double shifted_offset = static_cast<double>(n - 1 - i);
                weights[i] = std::exp(-spec.lambda * shifted_offset);
            }
            return SamplingDistribution::from_weights(weights);
        }
        case KernelKind::SeasonalUniform: {
            const std::vector<double> dist =
                feature_distances(spec, context_timestamps, target_timestamp);
            const double min_dist = *std::min_element(dist.begin(), dist.end());
            std::vector<double> weights(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                if (dist[i] <= min_dist + 1e-12) {
                    weights[i] = 1.0;
                }
            }
            return SamplingDistribution::from_weights(weights);
        }
        case KernelKind::SeasonalExponential: {
            check_lambda(spec.lambda);
            const std::vector<double> dist =
                feature_distances(spec, context_timestamps, target_timestamp);
            const double min_dist = *std::min_element(dist.begin(), dist.end());
            std::vector<double> weights(n);
            for (std::size_t i = 0; i < n; ++i) {
                weights[i] = std::exp(-spec.lambda * (dist[i] - min_dist));
            }
            return SamplingDistribution::from_weights(weights);
        }
    }
    throw std::logic_error("unreachable kernel kind");
}

} // namespace npts
