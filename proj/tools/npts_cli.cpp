#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "npts/dataset.hpp"
#include "npts/evaluation.hpp"
#include "npts/format.hpp"
#include "npts/models.hpp"
#include "npts/parallel.hpp"
#include "npts/synth.hpp"

namespace {

using namespace npts;

/// Flag combinations the parser cannot catch; reported with exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string data;
    std::string freq_text = "H";
    std::size_t prediction_length = 1;
    std::size_t num_windows = 1;
    std::string model = "npts-uniform";
    double lambda = 1.0;
    std::size_t context_multiplier = 28;
    std::size_t samples = 100;
    std::uint64_t seed = 0;
    int threads = default_threads();
    std::string out_dir = ".";
    bool emit_samples = false;

    std::size_t epochs = 200;
    double dropout = 0.0;
    std::string normalization = "softmax";
    std::string input_scaling = "standardization";
    std::string loss_scaling = "min-max";
    bool static_feat = false;
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    std::string save_model_path;
    std::string load_model_path;

    // The subcommand that parsed, used to tell "left at default" from "explicitly set".
    const CLI::App* active = nullptr;

    // synth
    std::string kind = "sinusoid";
    std::size_t num_series = 1;
    std::size_t length = 100;
    std::string start = "2015-01-01T00:00";
    double level = 10.0;
    double amplitude = 1.0;
    double period = 24.0;
    double noise = 0.1;
    double zero_prob = 0.5;
    std::string out_file;

    std::size_t bins = 50;
    std::string series_id;
};

void add_data_options(CLI::App* cmd, Options& opts, bool with_windows) {
    cmd->add_option("--data", opts.data, "Line-delimited JSON dataset")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--freq", opts.freq_text, "Observation frequency (e.g. H, D, 30min, W, M)")
        ->required();
    cmd->add_option("--prediction-length,-p", opts.prediction_length, "Forecast horizon in steps")
        ->check(CLI::PositiveNumber);
    if (with_windows) {
        cmd->add_option("--num-windows", opts.num_windows, "Rolling evaluation windows")
            ->check(CLI::PositiveNumber);
    }
    cmd->add_option("--out-dir", opts.out_dir, "Directory for emitted files");
}

void add_model_options(CLI::App* cmd, Options& opts, bool with_sampling) {
    cmd->add_option("--model", opts.model, "Model name")
        ->check(CLI::IsMember(model_names()));
    cmd->add_option("--lambda", opts.lambda, "Kernel width (pins the grid)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--context-multiplier", opts.context_multiplier,
                    "Context length as a multiple of the prediction length")
        ->check(CLI::PositiveNumber);
    if (with_sampling) {
        cmd->add_option("--samples", opts.samples, "Monte Carlo sample paths per forecast")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--threads", opts.threads, "Worker threads")->check(CLI::PositiveNumber);
    }
    cmd->add_option("--seed", opts.seed, "Random seed");

    cmd->add_option("--epochs", opts.epochs, "Training epochs (deepnpts)");
    cmd->add_option("--dropout", opts.dropout, "Hidden dropout rate (deepnpts)")
        ->check(CLI::Range(0.0, 0.999));
    cmd->add_option("--normalization", opts.normalization, "Output normalization (deepnpts)")
        ->check(CLI::IsMember({"softmax", "sum-normalize"}));
    cmd->add_option("--input-scaling", opts.input_scaling, "Input scaling (deepnpts)")
        ->check(CLI::IsMember({"none", "standardization"}));
    cmd->add_option("--loss-scaling", opts.loss_scaling, "Loss scaling (deepnpts)")
        ->check(CLI::IsMember({"none", "min-max"}));
    cmd->add_flag("--static-feat", opts.static_feat, "Append a per-series static feature");
    cmd->add_option("--learning-rate", opts.learning_rate, "Optimizer step size (deepnpts)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--batch-size", opts.batch_size, "Mini-batch size (deepnpts)")
        ->check(CLI::PositiveNumber);
}

/// True when the active subcommand has `name` and the user passed it explicitly.
bool flag_given(const Options& opts, const std::string& name) {
    if (opts.active == nullptr) {
        return false;
    }
    const CLI::Option* option = opts.active->get_option_no_throw(name);
    return option != nullptr && option->count() > 0;
}

DatasetManifest make_manifest(const Options& opts) {
    DatasetManifest manifest;
    manifest.path = opts.data;
    manifest.freq = Frequency::parse(opts.freq_text);
    manifest.prediction_length = opts.prediction_length;
    manifest.num_windows = opts.num_windows;
    return manifest;
}

std::vector<TimeSeries> load_panel(const DatasetManifest& manifest) {
    const LoadResult loaded = load_dataset(manifest);
    for (const std::string& error : loaded.errors) {
        std::cerr << "error: " << error << "\n";
    }
    if (!loaded.errors.empty()) {
        throw std::runtime_error(std::to_string(loaded.errors.size()) + " dataset error(s) in " +
                                 manifest.path);
    }
    return loaded.series;
}

TrainingConfig base_training_config(const Options& opts) {
    TrainingConfig config;
    config.context_length = opts.context_multiplier * opts.prediction_length;
    config.prediction_length = opts.prediction_length;
    config.epochs = opts.epochs;
    config.dropout = opts.dropout;
    config.normalization = parse_normalization(opts.normalization);
    config.input_scaling = parse_input_scaling(opts.input_scaling);
    config.loss_scaling = parse_loss_scaling(opts.loss_scaling);
    config.static_feature = opts.static_feat;
    config.learning_rate = opts.learning_rate;
    config.batch_size = opts.batch_size;
    config.seed = opts.seed;
    return config;
}

std::size_t kernel_max_context(const Options& opts) {
    return flag_given(opts, "--context-multiplier") ? opts.context_multiplier * opts.prediction_length
                                                    : 0;
}

std::optional<double> pinned_lambda(const Options& opts) {
    if (!flag_given(opts, "--lambda")) {
        return std::nullopt;
    }
    if (opts.model != "npts-exp" && opts.model != "seasonal-npts-exp") {
        throw UsageError("--lambda only applies to the exponential kernel models");
    }
    return opts.lambda;
}

/// Tuning grid: dimensions pinned on the command line collapse to that value.
DeepNptsGrid tuning_grid(const Options& opts) {
    DeepNptsGrid grid;
    if (flag_given(opts, "--epochs")) grid.epochs = {opts.epochs};
    if (flag_given(opts, "--dropout")) grid.dropout = {opts.dropout};
    if (flag_given(opts, "--normalization")) {
        grid.normalization = {parse_normalization(opts.normalization)};
    }
    if (flag_given(opts, "--input-scaling")) {
        grid.input_scaling = {parse_input_scaling(opts.input_scaling)};
    }
    if (flag_given(opts, "--loss-scaling")) {
        grid.loss_scaling = {parse_loss_scaling(opts.loss_scaling)};
    }
    return grid;
}

ModelFamily build_family(const Options& opts, const Frequency& freq) {
    return make_model_family(opts.model, freq, kernel_max_context(opts), pinned_lambda(opts),
                             base_training_config(opts), tuning_grid(opts));
}

/// One ready-to-use model with the exact configuration given on the command line
/// (no grid); deepnpts is trained on the panel or loaded from a file.
std::unique_ptr<Forecaster> build_single_model(const Options& opts, const Frequency& freq,
                                               const std::vector<TimeSeries>& panel) {
    if (opts.model == "deepnpts") {
        if (!opts.load_model_path.empty()) {
            return std::make_unique<DeepNptsForecaster>(load_model(opts.load_model_path));
        }
        TrainingLog log;
        DeepNptsModel model = train(panel, base_training_config(opts), &log);
        for (const std::string& warning : log.warnings) {
            std::cerr << "warning: " << warning << "\n";
        }
        std::cerr << "[npts] trained deepnpts on " << log.instance_count << " instances, final "
                  << "epoch loss "
                  << (log.epoch_loss.empty() ? std::string("n/a")
                                             : format_number(log.epoch_loss.back()))
                  << "\n";
        if (!opts.save_model_path.empty()) {
            const std::filesystem::path parent =
                std::filesystem::path(opts.save_model_path).parent_path();
            if (!parent.empty()) {
                std::filesystem::create_directories(parent);
            }
            save_model(model, opts.save_model_path);
        }
        return std::make_unique<DeepNptsForecaster>(std::move(model));
    }
    const ModelFamily family =
        make_model_family(opts.model, freq, kernel_max_context(opts), pinned_lambda(opts),
                          base_training_config(opts), DeepNptsGrid{});
    return family.candidates.front().build(panel);
}

std::vector<std::size_t> order_by_id(const std::vector<TimeSeries>& panel) {
    std::vector<std::size_t> order(panel.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return panel[a].id < panel[b].id;
    });
    return order;
}

std::filesystem::path prepare_out_dir(const Options& opts) {
    const std::filesystem::path dir(opts.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string dataset_label(const Options& opts) {
    return std::filesystem::path(opts.data).filename().string();
}

int run_synth(const Options& opts) {
    SynthSpec spec;
    spec.kind = parse_synth_kind(opts.kind);
    spec.num_series = opts.num_series;
    spec.length = opts.length;
    spec.freq = Frequency::parse(opts.freq_text);
    spec.start = parse_timestamp(opts.start);
    spec.level = opts.level;
    spec.amplitude = opts.amplitude;
    spec.period = opts.period;
    spec.noise = opts.noise;
    spec.zero_prob = opts.zero_prob;
    spec.seed = opts.seed;
    const std::vector<TimeSeries> panel = make_synthetic(spec);
    write_dataset_jsonl(opts.out_file, panel);
    std::cout << "wrote " << panel.size() << " series to " << opts.out_file << "\n";
    return 0;
}

int run_forecast(const Options& opts) {
    const DatasetManifest manifest = make_manifest(opts);
    const std::vector<TimeSeries> panel = load_panel(manifest);
    const std::unique_ptr<Forecaster> model = build_single_model(opts, manifest.freq, panel);

    const std::vector<std::size_t> order = order_by_id(panel);
    std::vector<ForecastRecord> records;
    records.reserve(panel.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const TimeSeries& series = panel[order[rank]];
        ForecastOptions fopts;
        fopts.horizon = opts.prediction_length;
        fopts.num_samples = opts.samples;
        fopts.seed = forecast_seed(opts.seed, rank, 0);
        fopts.threads = opts.threads;
        records.push_back(to_record(model->forecast(series, fopts), opts.emit_samples));
    }
    const std::filesystem::path out = prepare_out_dir(opts) / "forecasts.jsonl";
    write_forecasts_jsonl(out.string(), records);
    std::cout << "wrote " << records.size() << " forecasts to " << out.string() << "\n";
    return 0;
}

BacktestPlan make_plan(const Options& opts) {
    BacktestPlan plan;
    plan.prediction_length = opts.prediction_length;
    plan.num_windows = opts.num_windows;
    plan.num_samples = opts.samples;
    plan.seed = opts.seed;
    plan.threads = opts.threads;
    return plan;
}

int run_backtest(const Options& opts) {
    const DatasetManifest manifest = make_manifest(opts);
    std::vector<TimeSeries> panel = load_panel(manifest);
    {
        const std::vector<std::size_t> order = order_by_id(panel);
        std::vector<TimeSeries> sorted;
        sorted.reserve(panel.size());
        for (std::size_t idx : order) {
            sorted.push_back(std::move(panel[idx]));
        }
        panel = std::move(sorted);
    }
    const ModelFamily family = build_family(opts, manifest.freq);
    const BacktestPlan plan = make_plan(opts);
    const std::filesystem::path dir = prepare_out_dir(opts);

    std::size_t best = 0;
    if (family.candidates.size() > 1) {
        const std::size_t holdout = plan.prediction_length * plan.num_windows;
        std::vector<TimeSeries> train_panel = panel;
        for (TimeSeries& series : train_panel) {
            if (series.length() < holdout + 1) {
                throw std::runtime_error("series '" + series.id +
                                         "' too short to hold out the test range");
            }
            series.values.resize(series.length() - holdout);
        }
        const TuneResult tuned = tune(family, train_panel, plan);
        write_tune_csv((dir / "tune_scores.csv").string(), tuned);
        best = tuned.best_index;
        std::cout << "selected " << tuned.best_label << "\n";
    }

    const BacktestReport report = rolling_backtest(panel, family.candidates[best], plan);
    write_metrics_csv((dir / "metrics.csv").string(), {report}, dataset_label(opts));
    write_calibration_csv((dir / "calibration.csv").string(), report);
    char rounded[32];
    std::snprintf(rounded, sizeof(rounded), "%.3f", report.mean_loss);
    std::cout << "model=" << report.model_label << " dataset=" << dataset_label(opts)
              << " mean_quantile_loss=" << rounded
              << (report.unnormalized ? " (unnormalized: all actuals are zero)" : "") << "\n";
    std::cerr << "[npts] backtest evaluation took " << format_number(report.wall_seconds)
              << "s\n";
    return 0;
}

int run_tune(const Options& opts) {
    const DatasetManifest manifest = make_manifest(opts);
    std::vector<TimeSeries> panel = load_panel(manifest);
    {
        const std::vector<std::size_t> order = order_by_id(panel);
        std::vector<TimeSeries> sorted;
        sorted.reserve(panel.size());
        for (std::size_t idx : order) {
            sorted.push_back(std::move(panel[idx]));
        }
        panel = std::move(sorted);
    }
    const ModelFamily family = build_family(opts, manifest.freq);
    const TuneResult tuned = tune(family, panel, make_plan(opts));
    const std::filesystem::path out = prepare_out_dir(opts) / "tune_scores.csv";
    write_tune_csv(out.string(), tuned);
    std::cout << "best=" << tuned.best_label << " score="
              << format_number(tuned.scores[tuned.best_index].score) << "\n";
    return 0;
}

int run_histogram(const Options& opts) {
    const DatasetManifest manifest = make_manifest(opts);
    const std::vector<TimeSeries> panel = load_panel(manifest);
    std::vector<double> pooled;
    for (const std::size_t idx : order_by_id(panel)) {
        const TimeSeries& series = panel[idx];
        pooled.insert(pooled.end(), series.values.begin(), series.values.end());
    }
    const std::vector<HistogramBin> bins = histogram(pooled, opts.bins);
    const std::filesystem::path out = prepare_out_dir(opts) / "histogram.csv";
    write_histogram_csv(out.string(), bins);
    std::cout << "wrote " << bins.size() << " bins to " << out.string() << "\n";
    return 0;
}

int run_probe(const Options& opts) {
    const DatasetManifest manifest = make_manifest(opts);
    const std::vector<TimeSeries> panel = load_panel(manifest);
    const TimeSeries* series = &panel.front();
    if (!opts.series_id.empty()) {
        series = nullptr;
        for (const TimeSeries& candidate : panel) {
            if (candidate.id == opts.series_id) {
                series = &candidate;
                break;
            }
        }
        if (series == nullptr) {
            throw UsageError("no series with id '" + opts.series_id + "' in " + opts.data);
        }
    }
    const std::unique_ptr<Forecaster> model = build_single_model(opts, manifest.freq, panel);
    const std::unique_ptr<SamplingStrategy> strategy = model->bind(*series);
    const std::size_t length = series->length();
    const std::size_t window = strategy->window_length(length);
    if (window == 0 || window > length) {
        throw std::runtime_error("series '" + series->id + "' is too short to probe (window " +
                                 std::to_string(window) + ", length " + std::to_string(length) +
                                 ")");
    }
    const std::span<const double> values =
        std::span<const double>(series->values).subspan(length - window, window);
    const SamplingDistribution dist = strategy->distribution(values, length);

    const std::filesystem::path out = prepare_out_dir(opts) / "probe.csv";
    std::ofstream file(out);
    if (!file) {
        throw std::runtime_error("cannot open output file: " + out.string());
    }
    file << "timestamp,value,probability\n";
    for (std::size_t i = 0; i < window; ++i) {
        file << format_timestamp(timestamp_at(*series, length - window + i)) << ','
             << format_number(values[i]) << ',' << format_number(dist.probabilities()[i]) << "\n";
    }
    if (!file) {
        throw std::runtime_error("failed writing " + out.string());
    }
    std::cout << "wrote " << window << " probabilities for series '" << series->id << "' to "
              << out.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-parametric probabilistic time-series forecasting toolkit"};
    app.require_subcommand(1);
    Options opts;

    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    synth->add_option("--kind", opts.kind, "Generator")
        ->check(CLI::IsMember({"constant", "random-walk", "sinusoid", "intermittent-zeros"}));
    synth->add_option("--num-series", opts.num_series, "Series count")->check(CLI::PositiveNumber);
    synth->add_option("--length", opts.length, "Observations per series")
        ->check(CLI::PositiveNumber);
    synth->add_option("--freq", opts.freq_text, "Observation frequency");
    synth->add_option("--start", opts.start, "Timestamp of the first observation");
    synth->add_option("--level", opts.level, "Base level");
    synth->add_option("--amplitude", opts.amplitude, "Sinusoid amplitude");
    synth->add_option("--period", opts.period, "Sinusoid period in steps")
        ->check(CLI::PositiveNumber);
    synth->add_option("--noise", opts.noise, "Gaussian noise scale");
    synth->add_option("--zero-prob", opts.zero_prob, "Zero probability (intermittent-zeros)")
        ->check(CLI::Range(0.0, 1.0));
    synth->add_option("--seed", opts.seed, "Random seed");
    synth->add_option("--out", opts.out_file, "Output dataset path")->required();

    CLI::App* forecast = app.add_subcommand("forecast", "Forecast beyond each series' end");
    add_data_options(forecast, opts, false);
    add_model_options(forecast, opts, true);
    forecast->add_flag("--emit-samples", opts.emit_samples, "Include raw sample paths");
    forecast->add_option("--save-model", opts.save_model_path, "Write the trained model file");
    forecast->add_option("--load-model", opts.load_model_path, "Reuse a trained model file")
        ->check(CLI::ExistingFile);

    CLI::App* backtest = app.add_subcommand("backtest", "Tune, retrain and evaluate rolling windows");
    add_data_options(backtest, opts, true);
    add_model_options(backtest, opts, true);

    CLI::App* tune_cmd = app.add_subcommand("tune", "Score the hyperparameter grid");
    add_data_options(tune_cmd, opts, true);
    add_model_options(tune_cmd, opts, true);

    CLI::App* hist = app.add_subcommand("histogram", "Histogram of the pooled observed values");
    add_data_options(hist, opts, false);
    hist->add_option("--bins", opts.bins, "Histogram bin count")->check(CLI::PositiveNumber);

    CLI::App* probe = app.add_subcommand("probe", "Per-index sampling probabilities for one step");
    add_data_options(probe, opts, false);
    add_model_options(probe, opts, false);
    probe->add_option("--series", opts.series_id, "Series id to probe (default: first)");
    probe->add_option("--load-model", opts.load_model_path, "Reuse a trained model file")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (!app.get_subcommands().empty()) {
        opts.active = app.get_subcommands().front();
    }

    const auto started = std::chrono::steady_clock::now();
    int rc = 0;
    try {
        if (synth->parsed()) {
            rc = run_synth(opts);
        } else if (forecast->parsed()) {
            rc = run_forecast(opts);
        } else if (backtest->parsed()) {
            rc = run_backtest(opts);
        } else if (tune_cmd->parsed()) {
            rc = run_tune(opts);
        } else if (hist->parsed()) {
            rc = run_histogram(opts);
        } else if (probe->parsed()) {
            rc = run_probe(opts);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::fprintf(stderr, "[npts] done in %.2fs\n", elapsed);
    return rc;
}
