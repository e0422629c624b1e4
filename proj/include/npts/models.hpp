#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "npts/deepnpts.hpp"
#include "npts/forecaster.hpp"
#include "npts/kernels.hpp"
#include "npts/time.hpp"

namespace npts {

/// @brief A model that turns one series into Monte Carlo forecasts.
class Forecaster {
public:
    virtual ~Forecaster() = default;

    virtual std::string name() const = 0;

    /// @brief Binds the model to one series, yielding its per-step distribution source.
    /// The strategy references the series and must not outlive it.
    virtual std::unique_ptr<SamplingStrategy> bind(const TimeSeries& series) const = 0;

    ForecastResult forecast(const TimeSeries& series, const ForecastOptions& options) const;
};

/// @brief Local NPTS: samples past indices according to a fixed kernel.
class NptsForecaster : public Forecaster {
public:
    /// @brief max_context = 0 keeps the full available history as the window.
    explicit NptsForecaster(KernelSpec spec, std::size_t max_context = 0);

    std::string name() const override;
    std::unique_ptr<SamplingStrategy> bind(const TimeSeries& series) const override;
    const KernelSpec& spec() const { return spec_; }

private:
    KernelSpec spec_;
    std::size_t max_context_;
};

/// @brief Point forecast repeating the value one season back (previous value when the
/// history is shorter than a season).
class SeasonalNaiveForecaster : public Forecaster {
public:
    explicit SeasonalNaiveForecaster(Frequency freq);

    std::string name() const override;
    std::unique_ptr<SamplingStrategy> bind(const TimeSeries& series) const override;

    /// @brief Season length in steps for a frequency (e.g. 24 for hourly, 7 for daily);
    /// 1 when no whole season fits the step size.
    static std::size_t season_length(const Frequency& freq);

private:
    Frequency freq_;
    std::size_t season_;
};

/// @brief The trained global model applied per series.
class DeepNptsForecaster : public Forecaster {
public:
    explicit DeepNptsForecaster(DeepNptsModel model);

    std::string name() const override;
    std::unique_ptr<SamplingStrategy> bind(const TimeSeries& series) const override;
    const DeepNptsModel& model() const { return model_; }

private:
    DeepNptsModel model_;
};

/// @brief Builds a ready-to-forecast model from a training panel. Kernel models ignore
/// the panel; DeepNPTS trains on it.
using ModelFactory = std::function<std::unique_ptr<Forecaster>(const std::vector<TimeSeries>&)>;

struct ModelCandidate {
    std::string label;
    ModelFactory build;
};

/// @brief One named model together with its hyperparameter grid; the first candidate is
/// the default configuration.
struct ModelFamily {
    std::string name;
    std::vector<ModelCandidate> candidates;
};

/// @brief Hyperparameter ranges explored when tuning DeepNPTS.
struct DeepNptsGrid {
    std::vector<std::size_t> epochs{200, 300};
    std::vector<double> dropout{0.0, 0.1};
    std::vector<Normalization> normalization{Normalization::Softmax,
                                             Normalization::SumNormalize};
    std::vector<InputScaling> input_scaling{InputScaling::None, InputScaling::Standardization};
    std::vector<LossScaling> loss_scaling{LossScaling::None, LossScaling::MinMax};
};

/// @brief The model names accepted on the command line.
const std::vector<std::string>& model_names();

/// @brief Builds the candidate grid for a model name.
///
/// The exponential kernels enumerate the lambda grid unless `lambda` pins one value;
/// DeepNPTS enumerates `grid` on top of `deepnpts_base` (whose context_length,
/// prediction_length, seed and optimizer settings are kept as-is). max_context caps the
/// kernel window length (0 = unlimited).
ModelFamily make_model_family(const std::string& name, const Frequency& freq,
                              std::size_t max_context, std::optional<double> lambda,
                              const TrainingConfig& deepnpts_base, const DeepNptsGrid& grid);

} // namespace npts
