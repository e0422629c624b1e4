#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "npts/forecaster.hpp"
#include "npts/kernels.hpp"
#include "npts/time.hpp"

namespace npts {

enum class Normalization { Softmax, SumNormalize };
enum class InputScaling { None, Standardization };
enum class LossScaling { None, MinMax };

Normalization parse_normalization(const std::string& text);
InputScaling parse_input_scaling(const std::string& text);
LossScaling parse_loss_scaling(const std::string& text);
std::string normalization_str(Normalization mode);
std::string input_scaling_str(InputScaling mode);
std::string loss_scaling_str(LossScaling mode);

/// @brief Weights of the 2-layer network mapping a context window to index probabilities.
struct MlpParameters {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0; ///< equals the context length
    std::size_t output_dim = 0; ///< equals the context length
    std::vector<double> w1;     ///< hidden_dim x input_dim, row-major
    std::vector<double> b1;     ///< hidden_dim
    std::vector<double> w2;     ///< output_dim x hidden_dim, row-major
    std::vector<double> b2;     ///< output_dim
    Normalization normalization = Normalization::Softmax;
};

/// @brief Gradient buffers congruent to MlpParameters.
struct MlpGradients {
    std::vector<double> w1, b1, w2, b2;

    static MlpGradients zeros_like(const MlpParameters& params);
    void scale(double factor);
};

/// @brief Rows of the covariate matrix fed alongside the context values.
struct CovariateLayout {
    std::size_t time_feature_rows = 0; ///< derived from the frequency
    std::size_t dynamic_rows = 0;      ///< provided dynamic covariate rows
    bool static_row = false;           ///< per-series constant identifier feature

    std::size_t rows() const {
        return time_feature_rows + dynamic_rows + (static_row ? 1 : 0);
    }
};

/// @brief Per-window statistics backing input scaling and loss scaling.
struct ScaleStats {
    double mean = 0.0;
    double std = 1.0; ///< population standard deviation
    double min = 0.0;
    double max = 0.0;
};

ScaleStats scale_stats(std::span<const double> values);

/// @brief Applies the input-scaling mode to a window; returns the scaled copy and stats.
std::pair<std::vector<double>, ScaleStats> scale_inputs(std::span<const double> values,
                                                        InputScaling mode);

/// @brief One supervised example: a context window and the observation that follows it.
struct TrainingInstance {
    std::vector<double> context_values; ///< T raw observations
    std::vector<double> covariates;     ///< rows() x (T+1), row-major, columns = window..target
    double target = 0.0;                ///< real observation, one step after the window
    ScaleStats stats;                   ///< statistics of context_values
};

struct TrainingConfig {
    std::size_t context_length = 0;
    std::size_t prediction_length = 1;
    std::size_t epochs = 200;
    double dropout = 0.0;
    Normalization normalization = Normalization::Softmax;
    InputScaling input_scaling = InputScaling::Standardization;
    LossScaling loss_scaling = LossScaling::MinMax;
    bool static_feature = false;
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;
};

/// @brief Covariate columns for series indices start_index .. start_index+count-1,
/// row-major. Indices may extend past the observed values; time features are computed
/// from the calendar and dynamic covariates must cover the requested range.
std::vector<double> build_covariates(const TimeSeries& series, const CovariateLayout& layout,
                                     double static_value, std::size_t start_index,
                                     std::size_t count);

/// @brief Sliding-window training instances: up to prediction_length windows ending at
/// offsets 0..prediction_length-1 before the last observation, each targeting the next
/// value. Series shorter than context_length+1 yield no instances plus a warning.
std::vector<TrainingInstance> augment(const TimeSeries& series, std::size_t context_length,
                                      std::size_t prediction_length,
                                      const CovariateLayout& layout, double static_value,
                                      std::vector<std::string>& warnings);

/// @brief Flattens [scaled context values || covariates] into the network input vector.
std::vector<double> assemble_input(const TrainingInstance& instance, InputScaling mode);

/// @brief Intermediate activations kept for backpropagation.
struct ForwardTrace {
    std::vector<double> hidden_pre;   ///< layer-1 affine outputs
    std::vector<double> hidden;       ///< after nonlinearity (and dropout when training)
    std::vector<double> dropout_mask; ///< per-unit scale factors; empty outside training
    std::vector<double> logits;       ///< layer-2 affine outputs
    std::vector<double> probs;
    bool degenerate = false; ///< sum-normalize fell back to uniform
};

/// @brief Forward pass recording intermediates; dropout applied when rate > 0 and rng given.
ForwardTrace forward_trace(const MlpParameters& params, std::span<const double> input,
                           double dropout = 0.0, Rng* rng = nullptr);

/// @brief Forward pass producing the sampling distribution (prediction mode, no dropout).
SamplingDistribution forward(const MlpParameters& params, std::span<const double> input);

/// @brief The ranked probability score as a linear function of the index probabilities:
/// RPS(q) = sum_t weights[t] * q[t] + constant, with coefficients fixed by the ordering
/// of the context values relative to the target.
struct RpsLinearForm {
    std::vector<double> weights;
    double constant = 0.0;
};

RpsLinearForm rps_linear_form(std::span<const double> context_values, double target);

/// @brief Ranked probability score: sum of quantile losses over the distinct context
/// values, each evaluated at its cumulative probability level.
double rps_loss(const SamplingDistribution& dist, std::span<const double> context_values,
                double target);

/// @brief Mean loss and gradient over a batch; dropout and the loss/input scaling modes
/// come from the config. Returns the number of degenerate sum-normalize fallbacks.
struct BatchStats {
    double loss = 0.0;
    std::size_t degenerate = 0;
};

BatchStats loss_gradient(const MlpParameters& params, std::span<const TrainingInstance> batch,
                         const TrainingConfig& config, Rng& rng, MlpGradients& grads);

/// @brief A trained model plus everything needed to rebuild its inputs at prediction time.
struct DeepNptsModel {
    MlpParameters params;
    std::size_t context_length = 0;
    Frequency freq;
    CovariateLayout layout;
    InputScaling input_scaling = InputScaling::None;
    LossScaling loss_scaling = LossScaling::None;
    /// Per-series static feature values keyed by series id; empty unless enabled.
    std::vector<std::pair<std::string, double>> static_values;

    /// @brief Static feature for a series id; 0 (the center value) when unknown.
    double static_value_for(const std::string& id) const;
};

struct TrainingLog {
    std::vector<double> epoch_loss; ///< mean instance loss per epoch
    std::vector<std::string> warnings;
    std::size_t instance_count = 0;
    std::size_t degenerate_batches = 0;
};

/// @brief Trains the shared network on the pooled augmented instances of the panel.
DeepNptsModel train(const std::vector<TimeSeries>& panel, const TrainingConfig& config,
                    TrainingLog* log = nullptr);

/// @brief Binary model container with an embedded format version; round-trips bit-exact.
void save_model(const DeepNptsModel& model, const std::string& path);
DeepNptsModel load_model(const std::string& path);

} // namespace npts
