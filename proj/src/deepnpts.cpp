#include "npts/deepnpts.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace npts {

Normalization parse_normalization(const std::string& text) {
    if (text == "softmax") return Normalization::Softmax;
    if (text == "sum-normalize") return Normalization::SumNormalize;
    throw std::invalid_argument("unrecognized normalization mode: " + text);
}

InputScaling parse_input_scaling(const std::string& text) {
    if (text == "none") return InputScaling::None;
    if (text == "standardization") return InputScaling::Standardization;
    throw std::invalid_argument("unrecognized input scaling mode: " + text);
}

LossScaling parse_loss_scaling(const std::string& text) {
    if (text == "none") return LossScaling::None;
    if (text == "min-max") return LossScaling::MinMax;
    throw std::invalid_argument("unrecognized loss scaling mode: " + text);
}

std::string normalization_str(Normalization mode) {
    return mode == Normalization::Softmax ? "softmax" : "sum-normalize";
}

std::string input_scaling_str(InputScaling mode) {
    return mode == InputScaling::None ? "none" : "standardization";
}

std::string loss_scaling_str(LossScaling mode) {
    return mode == LossScaling::None ? "none" : "min-max";
}

MlpGradients MlpGradients::zeros_like(const MlpParameters& params) {
    MlpGradients g;
    g.w1.assign(params.w1.size(), 0.0);
    g.b1.assign(params.b1.size(), 0.0);
    g.w2.assign(params.w2.size(), 0.0);
    g.b2.assign(params.b2.size(), 0.0);
    return g;
}

void MlpGradients::scale(double factor) {
    for (double& v : w1) v *= factor;
    for (double& v : b1) v *= factor;
    for (double& v : w2) v *= factor;
    for (double& v : b2) v *= factor;
}

ScaleStats scale_stats(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("cannot compute scale statistics of an empty window");
    }
    ScaleStats stats;
    double sum = 0.0;
    stats.min = values[0];
    stats.max = values[0];
    for (double v : values) {
        sum += v;
        stats.min = std::min(stats.min, v);
        stats.max = std::max(stats.max, v);
    }
    stats.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) {
        const double d = v - stats.mean;
        sq += d * d;
    }
    stats.std = std::sqrt(sq / static_cast<double>(values.size()));
    return stats;
}

namespace {

std::vector<double> apply_scaling(std::span<const double> values, const ScaleStats& stats,
                                  InputScaling mode) {
    std::vector<double> out(values.begin(), values.end());
    if (mode == InputScaling::Standardization) {
        const double denom = stats.std < 1e-9 ? 1.0 : stats.std;
        for (double& v : out) {
            v = (v - stats.mean) / denom;
        }
    }
    return out;
}

double loss_scale(const ScaleStats& stats, LossScaling mode) {
    if (mode == LossScaling::MinMax) {
        const double range = stats.max - stats.min;
        if (range >= 1e-9) {
            return 1.0 / range;
        }
    }
    return 1.0;
}

} // namespace

std::pair<std::vector<double>, ScaleStats> scale_inputs(std::span<const double> values,
                                                        InputScaling mode) {
    const ScaleStats stats = scale_stats(values);
    return {apply_scaling(values, stats, mode), stats};
}

std::vector<double> build_covariates(const TimeSeries& series, const CovariateLayout& layout,
                                     double static_value, std::size_t start_index,
                                     std::size_t count) {
    if (layout.time_feature_rows != time_feature_dim(series.freq)) {
        throw std::invalid_argument("covariate layout does not match the series frequency");
    }
    std::vector<double> out(layout.rows() * count, 0.0);
    for (std::size_t j = 0; j < count; ++j) {
        const std::vector<double> feats =
            time_features(series.freq, timestamp_at(series, start_index + j));
        for (std::size_t r = 0; r < layout.time_feature_rows; ++r) {
            out[r * count + j] = feats[r];
        }
    }
    if (layout.dynamic_rows != series.covariates.size()) {
        throw std::invalid_argument("series '" + series.id + "' has " +
                                    std::to_string(series.covariates.size()) +
                                    " dynamic covariate rows, layout expects " +
                                    std::to_string(layout.dynamic_rows));
    }
    for (std::size_t d = 0; d < layout.dynamic_rows; ++d) {
        const std::vector<double>& row = series.covariates[d];
        if (row.size() < start_index + count) {
            throw std::runtime_error("dynamic covariates of series '" + series.id +
                                     "' do not cover index " +
                                     std::to_string(start_index + count - 1));
        }
        for (std::size_t j = 0; j < count; ++j) {
            out[(layout.time_feature_rows + d) * count + j] = row[start_index + j];
        }
    }
    if (layout.static_row) {
        const std::size_t r = layout.time_feature_rows + layout.dynamic_rows;
        for (std::size_t j = 0; j < count; ++j) {
            out[r * count + j] = static_value;
        }
    }
    return out;
}

std::vector<TrainingInstance> augment(const TimeSeries& series, std::size_t context_length,
                                      std::size_t prediction_length,
                                      const CovariateLayout& layout, double static_value,
                                      std::vector<std::string>& warnings) {
    if (context_length < 1 || prediction_length < 1) {
        throw std::invalid_argument("context and prediction lengths must be >= 1");
    }
    const std::size_t length = series.length();
    std::vector<TrainingInstance> instances;
    if (length < context_length + 1) {
        warnings.push_back("series '" + series.id + "' skipped: length " +
                           std::to_string(length) + " is below context_length+1 = " +
                           std::to_string(context_length + 1));
        return instances;
    }
    const std::size_t count = std::min(prediction_length, length - context_length);
    const std::size_t first_start = length - context_length - count;
    instances.reserve(count);
    for (std::size_t s = first_start; s < length - context_length; ++s) {
        TrainingInstance inst;
        inst.context_values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(s),
                                   series.values.begin() +
                                       static_cast<std::ptrdiff_t>(s + context_length));
        inst.covariates = build_covariates(series, layout, static_value, s, context_length + 1);
        inst.target = series.values[s + context_length];
        inst.stats = scale_stats(inst.context_values);
        instances.push_back(std::move(inst));
    }
    return instances;
}

std::vector<double> assemble_input(const TrainingInstance& instance, InputScaling mode) {
    std::vector<double> input = apply_scaling(instance.context_values, instance.stats, mode);
    input.insert(input.end(), instance.covariates.begin(), instance.covariates.end());
    return input;
}

namespace {

void check_params(const MlpParameters& params) {
    if (params.hidden_dim == 0 || params.input_dim == 0 || params.output_dim == 0 ||
        params.w1.size() != params.hidden_dim * params.input_dim ||
        params.b1.size() != params.hidden_dim ||
        params.w2.size() != params.output_dim * params.hidden_dim ||
        params.b2.size() != params.output_dim) {
        throw std::invalid_argument("network parameter shapes are inconsistent");
    }
}

} // namespace

ForwardTrace forward_trace(const MlpParameters& params, std::span<const double> input,
                           double dropout, Rng* rng) {
    check_params(params);
    if (input.size() != params.input_dim) {
        throw std::invalid_argument("input length " + std::to_string(input.size()) +
                                    " does not match network input dimension " +
                                    std::to_string(params.input_dim));
    }
    if (dropout < 0.0 || dropout >= 1.0) {
        throw std::invalid_argument("dropout rate must lie in [0, 1)");
    }

    ForwardTrace trace;
    trace.hidden_pre.resize(params.hidden_dim);
    for (std::size_t i = 0; i < params.hidden_dim; ++i) {
        double acc = params.b1[i];
        const double* row = params.w1.data() + i * params.input_dim;
        for (std::size_t k = 0; k < params.input_dim; ++k) {
            acc += row[k] * input[k];
        }
        if (!std::isfinite(acc)) {
            throw std::runtime_error("non-finite activation in layer 1");
        }
        trace.hidden_pre[i] = acc;
    }
    trace.hidden.resize(params.hidden_dim);
    for (std::size_t i = 0; i < params.hidden_dim; ++i) {
        trace.hidden[i] = std::max(0.0, trace.hidden_pre[i]);
    }
    if (dropout > 0.0 && rng != nullptr) {
        trace.dropout_mask.resize(params.hidden_dim);
        const double keep_scale = 1.0 / (1.0 - dropout);
        for (std::size_t i = 0; i < params.hidden_dim; ++i) {
            trace.dropout_mask[i] = rng->uniform() < dropout ? 0.0 : keep_scale;
            trace.hidden[i] *= trace.dropout_mask[i];
        }
    }

    trace.logits.resize(params.output_dim);
    for (std::size_t t = 0; t < params.output_dim; ++t) {
        double acc = params.b2[t];
        const double* row = params.w2.data() + t * params.hidden_dim;
        for (std::size_t i = 0; i < params.hidden_dim; ++i) {
            acc += row[i] * trace.hidden[i];
        }
        if (!std::isfinite(acc)) {
            throw std::runtime_error("non-finite activation in layer 2");
        }
        trace.logits[t] = acc;
    }

    trace.probs.resize(params.output_dim);
    if (params.normalization == Normalization::Softmax) {
        const double top = *std::max_element(trace.logits.begin(), trace.logits.end());
        double sum = 0.0;
        for (std::size_t t = 0; t < params.output_dim; ++t) {
            trace.probs[t] = std::exp(trace.logits[t] - top);
            sum += trace.probs[t];
        }
        for (double& p : trace.probs) {
            p /= sum;
        }
    } else {
        double sum = 0.0;
        for (std::size_t t = 0; t < params.output_dim; ++t) {
            trace.probs[t] = std::max(0.0, trace.logits[t]);
            sum += trace.probs[t];
        }
        if (sum <= 0.0) {
            // Every rectified output is zero; fall back to the uniform distribution.
            trace.degenerate = true;
            std::fill(trace.probs.begin(), trace.probs.end(),
                      1.0 / static_cast<double>(params.output_dim));
        } else {
            for (double& p : trace.probs) {
                p /= sum;
            }
        }
    }
    return trace;
}

SamplingDistribution forward(const MlpParameters& params, std::span<const double> input) {
    ForwardTrace trace = forward_trace(params, input);
    return SamplingDistribution::from_weights(trace.probs);
}

RpsLinearForm rps_linear_form(std::span<const double> context_values, double target) {
    if (context_values.empty()) {
        throw std::invalid_argument("empty context");
    }
    if (!std::isfinite(target)) {
        throw std::invalid_argument("target must be finite");
    }
    std::vector<double> distinct(context_values.begin(), context_values.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    // suffix[j] = sum over distinct values v_l with l >= j of (target - v_l), so the
    // coefficient of q_t is the suffix sum starting at the rank of the value at t.
    std::vector<double> suffix(distinct.size() + 1, 0.0);
    for (std::size_t j = distinct.size(); j-- > 0;) {
        suffix[j] = suffix[j + 1] + (target - distinct[j]);
    }
    RpsLinearForm form;
    form.weights.resize(context_values.size());
    for (std::size_t t = 0; t < context_values.size(); ++t) {
        const std::size_t rank = static_cast<std::size_t>(
            std::lower_bound(distinct.begin(), distinct.end(), context_values[t]) -
            distinct.begin());
        form.weights[t] = suffix[rank];
    }
    for (double v : distinct) {
        if (v > target) {
            form.constant += v - target;
        }
    }
    return form;
}

double rps_loss(const SamplingDistribution& dist, std::span<const double> context_values,
                double target) {
    if (!std::isfinite(target)) {
        throw std::invalid_argument("target must be finite");
    }
    const PredictiveDistribution pred = one_step_distribution(context_values, dist);
    double loss = 0.0;
    for (std::size_t j = 0; j < pred.support.size(); ++j) {
        const double level = pred.cdf[j];
        const double q = pred.support[j];
        const double indicator = target < q ? 1.0 : 0.0;
        loss += (level - indicator) * (target - q);
    }
    return loss;
}

BatchStats loss_gradient(const MlpParameters& params, std::span<const TrainingInstance> batch,
                         const TrainingConfig& config, Rng& rng, MlpGradients& grads) {
    if (batch.empty()) {
        throw std::invalid_argument("empty training batch");
    }
    check_params(params);
    grads = MlpGradients::zeros_like(params);
    BatchStats stats;

    std::vector<double> dlogit(params.output_dim);
    std::vector<double> dpre(params.hidden_dim);
    for (const TrainingInstance& inst : batch) {
        const std::vector<double> input = assemble_input(inst, config.input_scaling);
        const ForwardTrace trace = forward_trace(params, input, config.dropout, &rng);
        const RpsLinearForm form = rps_linear_form(inst.context_values, inst.target);
        const double scale = loss_scale(inst.stats, config.loss_scaling);

        double weighted = 0.0; // sum_t scale * w_t * q_t
        for (std::size_t t = 0; t < params.output_dim; ++t) {
            weighted += scale * form.weights[t] * trace.probs[t];
        }
        stats.loss += weighted + scale * form.constant;

        if (trace.degenerate) {
            // Uniform fallback carries no gradient through the normalization.
            ++stats.degenerate;
            continue;
        }
        if (params.normalization == Normalization::Softmax) {
            for (std::size_t t = 0; t < params.output_dim; ++t) {
                dlogit[t] = trace.probs[t] * (scale * form.weights[t] - weighted);
            }
        } else {
            double sum = 0.0;
            for (double logit : trace.logits) {
                sum += std::max(0.0, logit);
            }
            for (std::size_t t = 0; t < params.output_dim; ++t) {
                if (trace.logits[t] > 0.0) {
                    dlogit[t] = (scale * form.weights[t] - weighted) / sum;
                } else {
                    dlogit[t] = 0.0;
                }
            }
        }

        for (std::size_t t = 0; t < params.output_dim; ++t) {
            grads.b2[t] += dlogit[t];
            double* row = grads.w2.data() + t * params.hidden_dim;
            for (std::size_t i = 0; i < params.hidden_dim; ++i) {
                row[i] += dlogit[t] * trace.hidden[i];
            }
        }
        for (std::size_t i = 0; i < params.hidden_dim; ++i) {
            double acc = 0.0;
            for (std::size_t t = 0; t < params.output_dim; ++t) {
                acc += params.w2[t * params.hidden_dim + i] * dlogit[t];
            }
            if (!trace.dropout_mask.empty()) {
                acc *= trace.dropout_mask[i];
            }
            dpre[i] = trace.hidden_pre[i] > 0.0 ? acc : 0.0;
        }
        for (std::size_t i = 0; i < params.hidden_dim; ++i) {
            grads.b1[i] += dpre[i];
            double* row = grads.w1.data() + i * params.input_dim;
            for (std::size_t k = 0; k < params.input_dim; ++k) {
                row[k] += dpre[i] * input[k];
            }
        }
    }

    const double inv = 1.0 / static_cast<double>(batch.size());
    grads.scale(inv);
    stats.loss *= inv;
    return stats;
}

double DeepNptsModel::static_value_for(const std::string& id) const {
    for (const auto& [key, value] : static_values) {
        if (key == id) {
            return value;
        }
    }
    return 0.0;
}

namespace {

struct AdamState {
    std::vector<double> m, v;

    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(std::vector<double>& param, const std::vector<double>& grad, AdamState& state,
               double learning_rate, std::size_t step) {
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
    for (std::size_t i = 0; i < param.size(); ++i) {
        state.m[i] = kBeta1 * state.m[i] + (1.0 - kBeta1) * grad[i];
        state.v[i] = kBeta2 * state.v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        param[i] -= learning_rate * mhat / (std::sqrt(vhat) + kEps);
    }
}

bool all_finite(const std::vector<double>& values) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

void init_layer(std::vector<double>& weights, std::size_t fan_out, std::size_t fan_in, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    weights.resize(fan_out * fan_in);
    for (double& w : weights) {
        w = (2.0 * rng.uniform() - 1.0) * limit;
    }
}

} // namespace

DeepNptsModel train(const std::vector<TimeSeries>& panel, const TrainingConfig& config,
                    TrainingLog* log) {
    if (panel.empty()) {
        throw std::invalid_argument("empty training panel");
    }
    if (config.context_length < 1) {
        throw std::invalid_argument("context_length must be >= 1");
    }
    if (config.batch_size < 1) {
        throw std::invalid_argument("batch_size must be >= 1");
    }
    if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
        throw std::invalid_argument("learning_rate must be finite and positive");
    }
    if (config.dropout < 0.0 || config.dropout >= 1.0) {
        throw std::invalid_argument("dropout rate must lie in [0, 1)");
    }
    const Frequency freq = panel.front().freq;
    const std::size_t dynamic_rows = panel.front().covariates.size();
    for (const TimeSeries& series : panel) {
        if (!(series.freq == freq)) {
            throw std::invalid_argument("all series in a training panel must share one frequency");
        }
        if (series.covariates.size() != dynamic_rows) {
            throw std::invalid_argument(
                "all series in a training panel must have the same covariate rows");
        }
    }

    DeepNptsModel model;
    model.context_length = config.context_length;
    model.freq = freq;
    model.layout = CovariateLayout{time_feature_dim(freq), dynamic_rows, config.static_feature};
    model.input_scaling = config.input_scaling;
    model.loss_scaling = config.loss_scaling;

    TrainingLog local_log;
    TrainingLog& out_log = log != nullptr ? *log : local_log;
    std::vector<TrainingInstance> instances;
    const std::size_t num_series = panel.size();
    for (std::size_t idx = 0; idx < num_series; ++idx) {
        double static_value = 0.0;
        if (config.static_feature && num_series > 1) {
            static_value =
                static_cast<double>(idx) / static_cast<double>(num_series - 1) - 0.5;
        }
        if (config.static_feature) {
            model.static_values.emplace_back(panel[idx].id, static_value);
        }
        std::vector<TrainingInstance> added =
            augment(panel[idx], config.context_length, config.prediction_length, model.layout,
                    static_value, out_log.warnings);
        for (TrainingInstance& inst : added) {
            instances.push_back(std::move(inst));
        }
    }
    if (instances.empty()) {
        throw std::runtime_error("no trainable instances: every series is shorter than "
                                 "context_length+1 = " +
                                 std::to_string(config.context_length + 1));
    }
    out_log.instance_count = instances.size();

    const std::size_t context = config.context_length;
    MlpParameters& params = model.params;
    params.hidden_dim = context;
    params.output_dim = context;
    params.input_dim = context + model.layout.rows() * (context + 1);
    params.normalization = config.normalization;

    Rng rng(mix_seed(config.seed));
    init_layer(params.w1, params.hidden_dim, params.input_dim, rng);
    init_layer(params.w2, params.output_dim, params.hidden_dim, rng);
    params.b1.assign(params.hidden_dim, 0.0);
    params.b2.assign(params.output_dim, 0.0);

    AdamState adam_w1(params.w1.size());
    AdamState adam_b1(params.b1.size());
    AdamState adam_w2(params.w2.size());
    AdamState adam_b2(params.b2.size());

    std::vector<std::size_t> order(instances.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::vector<TrainingInstance> batch;
    MlpGradients grads;
    std::size_t adam_t = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(order, rng);
        double loss_sum = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(begin + config.batch_size, order.size());
            batch.clear();
            for (std::size_t i = begin; i < end; ++i) {
                batch.push_back(instances[order[i]]);
            }
            const std::size_t batch_index = begin / config.batch_size;
            const BatchStats stats = loss_gradient(params, batch, config, rng, grads);
            if (!std::isfinite(stats.loss)) {
                throw std::runtime_error("non-finite training loss at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(batch_index));
            }
            if (stats.degenerate > 0) {
                ++out_log.degenerate_batches;
            }
            ++adam_t;
            adam_step(params.w1, grads.w1, adam_w1, config.learning_rate, adam_t);
            adam_step(params.b1, grads.b1, adam_b1, config.learning_rate, adam_t);
            adam_step(params.w2, grads.w2, adam_w2, config.learning_rate, adam_t);
            adam_step(params.b2, grads.b2, adam_b2, config.learning_rate, adam_t);
            if (!all_finite(params.w1) || !all_finite(params.b1) || !all_finite(params.w2) ||
                !all_finite(params.b2)) {
                throw std::runtime_error("non-finite parameters after update at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(batch_index));
            }
            loss_sum += stats.loss * static_cast<double>(end - begin);
        }
        out_log.epoch_loss.push_back(loss_sum / static_cast<double>(instances.size()));
    }
    return model;
}

namespace {

constexpr char kModelMagic[8] = {'N', 'P', 'T', 'S', 'M', 'L', 'P', '\0'};
constexpr std::uint32_t kModelVersion = 1;

void write_u64(std::ofstream& out, std::uint64_t value) {
    char buf[8];
    for (int i = 0; i < 8; ++i) {
        buf[i] = static_cast<char>((value >> (8 * i)) & 0xff);
    }
    out.write(buf, 8);
}

void write_f64(std::ofstream& out, double value) {
    write_u64(out, std::bit_cast<std::uint64_t>(value));
}

void write_string(std::ofstream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint64_t read_u64(std::ifstream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) {
        throw std::runtime_error("truncated model file");
    }
    std::uint64_t value = 0;
    for (int i = 0; i < 8; ++i) {
        value |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    return value;
}

double read_f64(std::ifstream& in) {
    return std::bit_cast<double>(read_u64(in));
}

std::string read_string(std::ifstream& in) {
    const std::uint64_t size = read_u64(in);
    if (size > (1ULL << 20)) {
        throw std::runtime_error("implausible string length in model file");
    }
    std::string s(size, '\0');
    in.read(s.data(), static_cast<std::streamsize>(size));
    if (!in) {
        throw std::runtime_error("truncated model file");
    }
    return s;
}

void write_vector(std::ofstream& out, const std::vector<double>& values) {
    for (double v : values) {
        write_f64(out, v);
    }
}

std::vector<double> read_vector(std::ifstream& in, std::size_t count) {
    std::vector<double> values(count);
    for (double& v : values) {
        v = read_f64(in);
    }
    return values;
}

} // namespace

void save_model(const DeepNptsModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open model file for writing: " + path);
    }
    out.write(kModelMagic, sizeof(kModelMagic));
    write_u64(out, kModelVersion);
    write_u64(out, model.context_length);
    write_u64(out, model.params.input_dim);
    write_u64(out, model.params.hidden_dim);
    write_u64(out, model.params.output_dim);
    write_u64(out, static_cast<std::uint64_t>(model.params.normalization));
    write_u64(out, static_cast<std::uint64_t>(model.input_scaling));
    write_u64(out, static_cast<std::uint64_t>(model.loss_scaling));
    write_u64(out, model.layout.time_feature_rows);
    write_u64(out, model.layout.dynamic_rows);
    write_u64(out, model.layout.static_row ? 1 : 0);
    write_string(out, model.freq.str());
    write_u64(out, model.static_values.size());
    for (const auto& [id, value] : model.static_values) {
        write_string(out, id);
        write_f64(out, value);
    }
    write_vector(out, model.params.w1);
    write_vector(out, model.params.b1);
    write_vector(out, model.params.w2);
    write_vector(out, model.params.b2);
    if (!out) {
        throw std::runtime_error("failed writing model file: " + path);
    }
}

DeepNptsModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open model file: " + path);
    }
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0) {
        throw std::runtime_error("not a model file: " + path);
    }
    const std::uint64_t version = read_u64(in);
    if (version != kModelVersion) {
        throw std::runtime_error("unsupported model file version " + std::to_string(version));
    }
    DeepNptsModel model;
    model.context_length = read_u64(in);
    model.params.input_dim = read_u64(in);
    model.params.hidden_dim = read_u64(in);
    model.params.output_dim = read_u64(in);
    model.params.normalization = static_cast<Normalization>(read_u64(in));
    model.input_scaling = static_cast<InputScaling>(read_u64(in));
    model.loss_scaling = static_cast<LossScaling>(read_u64(in));
    model.layout.time_feature_rows = read_u64(in);
    model.layout.dynamic_rows = read_u64(in);
    model.layout.static_row = read_u64(in) != 0;
    model.freq = Frequency::parse(read_string(in));
    const std::uint64_t static_count = read_u64(in);
    if (static_count > (1ULL << 24)) {
        throw std::runtime_error("implausible static feature count in model file");
    }
    for (std::uint64_t i = 0; i < static_count; ++i) {
        std::string id = read_string(in);
        const double value = read_f64(in);
        model.static_values.emplace_back(std::move(id), value);
    }
    const std::size_t dims_limit = 1ULL << 30;
    if (model.params.input_dim == 0 || model.params.hidden_dim == 0 ||
        model.params.output_dim == 0 ||
        model.params.hidden_dim != model.context_length ||
        model.params.output_dim != model.context_length ||
        model.params.input_dim > dims_limit ||
        model.params.hidden_dim * model.params.input_dim > dims_limit) {
        throw std::runtime_error("inconsistent dimensions in model file");
    }
    model.params.w1 = read_vector(in, model.params.hidden_dim * model.params.input_dim);
    model.params.b1 = read_vector(in, model.params.hidden_dim);
    model.params.w2 = read_vector(in, model.params.output_dim * model.params.hidden_dim);
    model.params.b2 = read_vector(in, model.params.output_dim);
    check_params(model.params);
    return model;
}

} // namespace npts
