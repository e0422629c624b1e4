#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "npts/time.hpp"

namespace npts {

enum class SynthKind { Constant, RandomWalk, Sinusoid, IntermittentZeros };

SynthKind parse_synth_kind(const std::string& text);
std::string synth_kind_str(SynthKind kind);

/// @brief Parameters of the built-in synthetic panel generators.
struct SynthSpec {
    SynthKind kind = SynthKind::Sinusoid;
    std::size_t num_series = 1;
    std::size_t length = 100;
    Frequency freq{FreqUnit::Hourly, 1};
    Timestamp start = default_start();
    double level = 10.0;     ///< base value of every generator
    double amplitude = 1.0;  ///< sinusoid peak deviation
    double period = 24.0;    ///< sinusoid period in steps
    double noise = 0.1;      ///< Gaussian noise scale (sinusoid, random-walk step size)
    double zero_prob = 0.5;  ///< probability of a zero (intermittent-zeros)
    std::uint64_t seed = 0;

    static Timestamp default_start();
};

/// @brief Deterministic panel of synthetic series; each series has its own rng stream
/// derived from the seed and series index, so the panel does not depend on generation
/// order.
std::vector<TimeSeries> make_synthetic(const SynthSpec& spec);

} // namespace npts
