#include "npts/models.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace npts {

namespace {

std::string format_lambda(double lambda) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", lambda);
    return buf;
}

class KernelStrategy : public SamplingStrategy {
public:
    KernelStrategy(const TimeSeries& series, KernelSpec spec, std::size_t max_context)
        : series_(series), spec_(std::move(spec)), max_context_(max_context) {}

    std::size_t window_length(std::size_t available) const override {
        if (max_context_ > 0) {
            return std::min(available, max_context_);
        }
        return available;
    }

    bool value_dependent() const override { return false; }

    SamplingDistribution distribution(std::span<const double>,
                                      std::size_t target_index) const override {
        const std::size_t window = window_length(target_index);
        std::vector<Timestamp> timestamps(window);
        const std::size_t first = target_index - window;
        for (std::size_t i = 0; i < window; ++i) {
            timestamps[i] = timestamp_at(series_, first + i);
        }
        return kernel_weights(spec_, timestamps, timestamp_at(series_, target_index));
    }

private:
    const TimeSeries& series_;
    KernelSpec spec_;
    std::size_t max_context_;
};

class SeasonalNaiveStrategy : public SamplingStrategy {
public:
    explicit SeasonalNaiveStrategy(std::size_t season) : season_(season) {}

    std::size_t window_length(std::size_t available) const override {
        return std::min(available, season_);
    }

    bool value_dependent() const override { return false; }

    SamplingDistribution distribution(std::span<const double>,
                                      std::size_t target_index) const override {
        const std::size_t window = window_length(target_index);
        std::vector<double> probs(window, 0.0);
        if (window == season_) {
            probs.front() = 1.0; // exactly one season back
        } else {
            probs.back() = 1.0; // short history: repeat the previous value
        }
        return SamplingDistribution(std::move(probs));
    }

private:
    std::size_t season_;
};

class DeepNptsStrategy : public SamplingStrategy {
public:
    DeepNptsStrategy(const TimeSeries& series, const DeepNptsModel& model)
        : series_(series), model_(model), static_value_(model.static_value_for(series.id)) {}

    std::size_t window_length(std::size_t) const override { return model_.context_length; }

    bool value_dependent() const override { return true; }

    SamplingDistribution distribution(std::span<const double> window_values,
                                      std::size_t target_index) const override {
        const std::size_t context = model_.context_length;
        if (window_values.size() != context) {
            throw std::invalid_argument("window length " + std::to_string(window_values.size()) +
                                        " does not match model context length " +
                                        std::to_string(context));
        }
        auto [input, stats] = scale_inputs(window_values, model_.input_scaling);
        (void)stats;
        const std::vector<double> covs = build_covariates(
            series_, model_.layout, static_value_, target_index - context, context + 1);
        input.insert(input.end(), covs.begin(), covs.end());
        return forward(model_.params, input);
    }

private:
    const TimeSeries& series_;
    const DeepNptsModel& model_;
    double static_value_;
};

} // namespace

ForecastResult Forecaster::forecast(const TimeSeries& series,
                                    const ForecastOptions& options) const {
    const std::unique_ptr<SamplingStrategy> strategy = bind(series);
    return forecast_paths(series, *strategy, options);
}

NptsForecaster::NptsForecaster(KernelSpec spec, std::size_t max_context)
    : spec_(std::move(spec)), max_context_(max_context) {}

std::string NptsForecaster::name() const {
    switch (spec_.kind) {
        case KernelKind::Uniform: return "npts-uniform";
        case KernelKind::Exponential: return "npts-exp(lambda=" + format_lambda(spec_.lambda) + ")";
        case KernelKind::SeasonalUniform: return "seasonal-npts-uniform";
        case KernelKind::SeasonalExponential:
            return "seasonal-npts-exp(lambda=" + format_lambda(spec_.lambda) + ")";
    }
    throw std::logic_error("unreachable kernel kind");
}

std::unique_ptr<SamplingStrategy> NptsForecaster::bind(const TimeSeries& series) const {
    KernelSpec spec = spec_;
    spec.freq = series.freq;
    return std::make_unique<KernelStrategy>(series, std::move(spec), max_context_);
}

SeasonalNaiveForecaster::SeasonalNaiveForecaster(Frequency freq)
    : freq_(freq), season_(season_length(freq)) {}

std::string SeasonalNaiveForecaster::name() const { return "seasonal-naive"; }

std::unique_ptr<SamplingStrategy> SeasonalNaiveForecaster::bind(const TimeSeries& series) const {
    if (!(series.freq == freq_)) {
        throw std::invalid_argument("series '" + series.id + "' frequency " + series.freq.str() +
                                    " does not match the model frequency " + freq_.str());
    }
    return std::make_unique<SeasonalNaiveStrategy>(season_);
}

std::size_t SeasonalNaiveForecaster::season_length(const Frequency& freq) {
    std::size_t base = 0;
    switch (freq.unit) {
        case FreqUnit::Minute: base = 24 * 60; break; // one day of minutes
        case FreqUnit::Hourly: base = 24; break;      // one day
        case FreqUnit::Daily: base = 7; break;        // one week
        case FreqUnit::Weekly: base = 52; break;      // one year
        case FreqUnit::Monthly: base = 12; break;     // one year
    }
    const std::size_t multiple = static_cast<std::size_t>(freq.multiple);
    if (multiple == 0 || base % multiple != 0 || base / multiple == 0) {
        return 1;
    }
    return base / multiple;
}

DeepNptsForecaster::DeepNptsForecaster(DeepNptsModel model) : model_(std::move(model)) {}

std::string DeepNptsForecaster::name() const { return "deepnpts"; }

std::unique_ptr<SamplingStrategy> DeepNptsForecaster::bind(const TimeSeries& series) const {
    if (!(series.freq == model_.freq)) {
        throw std::invalid_argument("series '" + series.id + "' frequency " + series.freq.str() +
                                    " does not match the model frequency " + model_.freq.str());
    }
    return std::make_unique<DeepNptsStrategy>(series, model_);
}

const std::vector<std::string>& model_names() {
    static const std::vector<std::string> names = {
        "npts-uniform",        "npts-exp", "seasonal-npts-uniform", "seasonal-npts-exp",
        "deepnpts",            "seasonal-naive",
    };
    return names;
}

namespace {

ModelCandidate kernel_candidate(KernelSpec spec, std::size_t max_context) {
    ModelCandidate candidate;
    candidate.label = NptsForecaster(spec, max_context).name();
    candidate.build = [spec, max_context](const std::vector<TimeSeries>&) {
        return std::make_unique<NptsForecaster>(spec, max_context);
    };
    return candidate;
}

std::vector<ModelCandidate> kernel_family(KernelKind kind, const Frequency& freq,
                                          std::size_t max_context,
                                          std::optional<double> lambda) {
    std::vector<ModelCandidate> candidates;
    KernelSpec spec;
    spec.kind = kind;
    spec.freq = freq;
    const bool exponential =
        kind == KernelKind::Exponential || kind == KernelKind::SeasonalExponential;
    if (!exponential) {
        candidates.push_back(kernel_candidate(spec, max_context));
        return candidates;
    }
    if (lambda.has_value()) {
        spec.lambda = *lambda;
        candidates.push_back(kernel_candidate(spec, max_context));
        return candidates;
    }
    for (double value : lambda_grid()) {
        spec.lambda = value;
        candidates.push_back(kernel_candidate(spec, max_context));
    }
    return candidates;
}

std::string deepnpts_label(const TrainingConfig& config) {
    return "deepnpts(epochs=" + std::to_string(config.epochs) +
           ",dropout=" + format_lambda(config.dropout) +
           ",norm=" + normalization_str(config.normalization) +
           ",input=" + input_scaling_str(config.input_scaling) +
           ",loss=" + loss_scaling_str(config.loss_scaling) + ")";
}

std::vector<ModelCandidate> deepnpts_family(const TrainingConfig& base,
                                            const DeepNptsGrid& grid) {
    std::vector<ModelCandidate> candidates;
    for (std::size_t epochs : grid.epochs) {
        for (double dropout : grid.dropout) {
            for (Normalization normalization : grid.normalization) {
                for (InputScaling input_scaling : grid.input_scaling) {
                    for (LossScaling loss_scaling : grid.loss_scaling) {
                        TrainingConfig config = base;
                        config.epochs = epochs;
                        config.dropout = dropout;
                        config.normalization = normalization;
                        config.input_scaling = input_scaling;
                        config.loss_scaling = loss_scaling;
                        ModelCandidate candidate;
                        candidate.label = deepnpts_label(config);
                        candidate.build = [config](const std::vector<TimeSeries>& panel) {
                            return std::make_unique<DeepNptsForecaster>(train(panel, config));
                        };
                        candidates.push_back(std::move(candidate));
                    }
                }
            }
        }
    }
    return candidates;
}

} // namespace

ModelFamily make_model_family(const std::string& name, const Frequency& freq,
                              std::size_t max_context, std::optional<double> lambda,
                              const TrainingConfig& deepnpts_base, const DeepNptsGrid& grid) {
    ModelFamily family;
    family.name = name;
    if (name == "npts-uniform") {
        family.candidates = kernel_family(KernelKind::Uniform, freq, max_context, lambda);
    } else if (name == "npts-exp") {
        family.candidates = kernel_family(KernelKind::Exponential, freq, max_context, lambda);
    } else if (name == "seasonal-npts-uniform") {
        family.candidates = kernel_family(KernelKind::SeasonalUniform, freq, max_context, lambda);
    } else if (name == "seasonal-npts-exp") {
        family.candidates =
            kernel_family(KernelKind::SeasonalExponential, freq, max_context, lambda);
    } else if (name == "deepnpts") {
        family.candidates = deepnpts_family(deepnpts_base, grid);
    } else if (name == "seasonal-naive") {
        ModelCandidate candidate;
        candidate.label = "seasonal-naive";
        candidate.build = [freq](const std::vector<TimeSeries>&) {
            return std::make_unique<SeasonalNaiveForecaster>(freq);
        };
        family.candidates.push_back(std::move(candidate));
    } else {
        throw std::invalid_argument("unknown model name: " + name);
    }
    return family;
}

} // namespace npts
