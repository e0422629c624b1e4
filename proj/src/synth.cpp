#include "npts/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "npts/rng.hpp"

namespace npts {

SynthKind parse_synth_kind(const std::string& text) {
    if (text == "constant") return SynthKind::Constant;
    if (text == "random-walk") return SynthKind::RandomWalk;
    if (text == "sinusoid") return SynthKind::Sinusoid;
    if (text == "intermittent-zeros") return SynthKind::IntermittentZeros;
    throw std::invalid_argument("unrecognized synthetic kind: " + text);
}

std::string synth_kind_str(SynthKind kind) {
    switch (kind) {
        case SynthKind::Constant: return "constant";
        case SynthKind::RandomWalk: return "random-walk";
        case SynthKind::Sinusoid: return "sinusoid";
        case SynthKind::IntermittentZeros: return "intermittent-zeros";
    }
    throw std::logic_error("unreachable synthetic kind");
}

Timestamp SynthSpec::default_start() {
    return parse_timestamp("2015-01-01T00:00");
}

std::vector<TimeSeries> make_synthetic(const SynthSpec& spec) {
    if (spec.num_series < 1 || spec.length < 1) {
        throw std::invalid_argument("synthetic panels need num_series >= 1 and length >= 1");
    }
    if (spec.kind == SynthKind::Sinusoid && !(spec.period > 0.0)) {
        throw std::invalid_argument("sinusoid period must be positive");
    }
    if (spec.kind == SynthKind::IntermittentZeros &&
        (spec.zero_prob < 0.0 || spec.zero_prob > 1.0)) {
        throw std::invalid_argument("zero probability must lie in [0, 1]");
    }
    std::vector<TimeSeries> panel;
    panel.reserve(spec.num_series);
    for (std::size_t idx = 0; idx < spec.num_series; ++idx) {
        Rng rng(mix_seed(spec.seed + 0x9E3779B97F4A7C15ULL * (idx + 1)));
        TimeSeries series;
        char id[64];
        std::snprintf(id, sizeof(id), "%s-%04zu", synth_kind_str(spec.kind).c_str(), idx);
        series.id = id;
        series.start = spec.start;
        series.freq = spec.freq;
        series.values.resize(spec.length);
        switch (spec.kind) {
            case SynthKind::Constant: {
                const double value = spec.level + static_cast<double>(idx);
                for (double& v : series.values) {
                    v = value;
                }
                break;
            }
            case SynthKind::RandomWalk: {
                double value = spec.level;
                for (double& v : series.values) {
                    v = value;
                    value += spec.noise * rng.normal();
                }
                break;
            }
            case SynthKind::Sinusoid: {
                const double phase = rng.uniform() * spec.period;
                for (std::size_t t = 0; t < spec.length; ++t) {
                    const double angle =
                        2.0 * std::numbers::pi * (static_cast<double>(t) + phase) / spec.period;
                    series.values[t] =
                        spec.level + spec.amplitude * std::sin(angle) + spec.noise * rng.normal();
                }
                break;
            }
            case SynthKind::IntermittentZeros: {
                for (double& v : series.values) {
                    if (rng.uniform() < spec.zero_prob) {
                        v = 0.0;
                    } else {
                        v = spec.level * (0.5 + rng.uniform());
                    }
                }
                break;
            }
        }
        panel.push_back(std::move(series));
    }
    return panel;
}

} // namespace npts
