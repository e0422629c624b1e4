#include "npts/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "npts/format.hpp"
#include "npts/parallel.hpp"
#include "npts/rng.hpp"

namespace npts {

double quantile_loss(double predicted, double actual, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("quantile level must lie in (0, 1), got " +
                                    std::to_string(level));
    }
    const double indicator = actual < predicted ? 1.0 : 0.0;
    return (level - indicator) * (actual - predicted);
}

void EvalAccumulator::add(std::span<const double> levels, std::span<const double> predicted,
                          double actual) {
    if (levels.size() != predicted.size() || levels.empty()) {
        throw std::invalid_argument("levels and predicted quantiles must align and be nonempty");
    }
    if (levels_ == 0) {
        levels_ = levels.size();
    } else if (levels_ != levels.size()) {
        throw std::invalid_argument("level count changed between evaluation points");
    }
    for (std::size_t i = 0; i < levels.size(); ++i) {
        loss_sum_ += quantile_loss(predicted[i], actual, levels[i]);
    }
    abs_sum_ += std::abs(actual);
    ++points_;
}

void EvalAccumulator::merge(const EvalAccumulator& other) {
    if (other.points_ == 0) {
        return;
    }
    if (levels_ == 0) {
        levels_ = other.levels_;
    } else if (other.levels_ != levels_) {
        throw std::invalid_argument("cannot merge accumulators with different level counts");
    }
    loss_sum_ += other.loss_sum_;
    abs_sum_ += other.abs_sum_;
    points_ += other.points_;
}

double EvalAccumulator::value(bool* unnormalized) const {
    if (points_ == 0) {
        throw std::runtime_error("no evaluation points accumulated");
    }
    if (unnormalized != nullptr) {
        *unnormalized = false;
    }
    const double denom = abs_sum_ * static_cast<double>(levels_);
    if (denom > 0.0) {
        return loss_sum_ / denom;
    }
    if (unnormalized != nullptr) {
        *unnormalized = true;
    }
    return loss_sum_ / (static_cast<double>(points_) * static_cast<double>(levels_));
}

double mean_quantile_loss(std::span<const double> levels,
                          const std::vector<std::vector<double>>& predicted,
                          std::span<const double> actuals, bool* unnormalized) {
    if (predicted.size() != actuals.size()) {
        throw std::invalid_argument("predicted points and actuals must align");
    }
    EvalAccumulator acc;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        acc.add(levels, predicted[i], actuals[i]);
    }
    return acc.value(unnormalized);
}

double coverage(std::span<const double> predicted, std::span<const double> actuals) {
    if (predicted.size() != actuals.size() || predicted.empty()) {
        throw std::invalid_argument("predicted quantiles and actuals must align and be nonempty");
    }
    std::size_t covered = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (actuals[i] <= predicted[i]) {
            ++covered;
        }
    }
    return static_cast<double>(covered) / static_cast<double>(predicted.size());
}

std::uint64_t forecast_seed(std::uint64_t base, std::size_t series_index, std::size_t window) {
    const std::uint64_t mixed =
        mix_seed(0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(series_index) + 1) +
                 static_cast<std::uint64_t>(window));
    return mix_seed(base ^ mixed);
}

namespace {

struct SeriesEval {
    EvalAccumulator acc;
    std::vector<std::size_t> covered; ///< per level
};

} // namespace

BacktestReport rolling_backtest(const std::vector<TimeSeries>& panel,
                                const ModelCandidate& candidate, const BacktestPlan& plan) {
    const auto started = std::chrono::steady_clock::now();
    if (panel.empty()) {
        throw std::invalid_argument("empty evaluation panel");
    }
    if (plan.prediction_length < 1 || plan.num_windows < 1) {
        throw std::invalid_argument("prediction_length and num_windows must be >= 1");
    }
    if (plan.quantile_levels.empty()) {
        throw std::invalid_argument("no quantile levels configured");
    }
    const std::size_t horizon = plan.prediction_length;
    const std::size_t holdout = horizon * plan.num_windows;
    for (const TimeSeries& series : panel) {
        if (series.length() < holdout + 1) {
            throw std::runtime_error("series '" + series.id + "' too short for backtest: needs " +
                                     std::to_string(holdout + 1) + " observations, has " +
                                     std::to_string(series.length()));
        }
    }

    std::vector<TimeSeries> train_panel = panel;
    for (TimeSeries& series : train_panel) {
        series.values.resize(series.length() - holdout);
    }
    const std::unique_ptr<Forecaster> model = candidate.build(train_panel);

    const std::size_t num_levels = plan.quantile_levels.size();
    std::vector<SeriesEval> evals(panel.size());
    parallel_for(panel.size(), plan.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            const TimeSeries& series = panel[s];
            SeriesEval& eval = evals[s];
            eval.covered.assign(num_levels, 0);
            TimeSeries context = series;
            const std::size_t train_length = series.length() - holdout;
            for (std::size_t w = 0; w < plan.num_windows; ++w) {
                const std::size_t context_length = train_length + w * horizon;
                context.values.assign(series.values.begin(),
                                      series.values.begin() +
                                          static_cast<std::ptrdiff_t>(context_length));
                ForecastOptions options;
                options.horizon = horizon;
                options.num_samples = plan.num_samples;
                options.seed = forecast_seed(plan.seed, s, w);
                options.threads = 1;
                options.quantile_levels = plan.quantile_levels;
                const ForecastResult result = model->forecast(context, options);
                std::vector<double> point(num_levels);
                for (std::size_t h = 0; h < horizon; ++h) {
                    const double actual = series.values[context_length + h];
                    for (std::size_t li = 0; li < num_levels; ++li) {
                        const double q =
                            result.quantile_curves.at(plan.quantile_levels[li])[h];
                        point[li] = q;
                        if (actual <= q) {
                            ++eval.covered[li];
                        }
                    }
                    eval.acc.add(plan.quantile_levels, point, actual);
                }
            }
        }
    });

    BacktestReport report;
    report.model_label = candidate.label;
    report.levels = plan.quantile_levels;
    EvalAccumulator total;
    std::vector<std::size_t> covered(num_levels, 0);
    for (std::size_t s = 0; s < panel.size(); ++s) {
        bool series_unnormalized = false;
        report.per_series_loss.emplace_back(panel[s].id,
                                            evals[s].acc.value(&series_unnormalized));
        total.merge(evals[s].acc);
        for (std::size_t li = 0; li < num_levels; ++li) {
            covered[li] += evals[s].covered[li];
        }
    }
    report.mean_loss = total.value(&report.unnormalized);
    const double total_points = static_cast<double>(total.points());
    report.coverage_by_level.resize(num_levels);
    report.calibration_error.resize(num_levels);
    for (std::size_t li = 0; li < num_levels; ++li) {
        report.coverage_by_level[li] = static_cast<double>(covered[li]) / total_points;
        report.calibration_error[li] =
            std::abs(report.coverage_by_level[li] - plan.quantile_levels[li]);
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

TuneResult tune(const ModelFamily& family, const std::vector<TimeSeries>& panel,
                const BacktestPlan& plan) {
    if (family.candidates.empty()) {
        throw std::invalid_argument("model family has no candidates");
    }
    TuneResult result;
    bool have_best = false;
    double best_score = 0.0;
    for (std::size_t i = 0; i < family.candidates.size(); ++i) {
        CandidateScore entry;
        entry.label = family.candidates[i].label;
        try {
            const BacktestReport report = rolling_backtest(panel, family.candidates[i], plan);
            entry.score = report.mean_loss;
            if (!have_best || entry.score < best_score) {
                have_best = true;
                best_score = entry.score;
                result.best_index = i;
            }
        } catch (const std::exception& e) {
            entry.failed = true;
            entry.error = e.what();
        }
        result.scores.push_back(std::move(entry));
    }
    if (!have_best) {
        throw std::runtime_error("every candidate of model family '" + family.name +
                                 "' failed during tuning");
    }
    result.best_label = family.candidates[result.best_index].label;
    return result;
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins) {
    if (values.empty()) {
        throw std::invalid_argument("cannot build a histogram of zero values");
    }
    if (bins < 1) {
        throw std::invalid_argument("bin count must be >= 1");
    }
    const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *min_it;
    const double hi = *max_it;
    if (hi - lo <= 0.0) {
        return {HistogramBin{lo - 0.5, lo + 0.5, values.size()}};
    }
    std::vector<HistogramBin> out(bins);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b].left = lo + width * static_cast<double>(b);
        out[b].right = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
    }
    for (double v : values) {
        std::size_t b = static_cast<std::size_t>((v - lo) / width);
        b = std::min(b, bins - 1);
        ++out[b].count;
    }
    return out;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + path);
    }
    return out;
}

} // namespace

void write_metrics_csv(const std::string& path, const std::vector<BacktestReport>& reports,
                       const std::string& dataset) {
    std::ofstream out = open_out(path);
    out << "model,dataset,mean_quantile_loss";
    if (!reports.empty()) {
        for (double level : reports.front().levels) {
            out << ",coverage_" << format_number(level);
        }
    }
    out << "\n";
    for (const BacktestReport& report : reports) {
        out << csv_field(report.model_label) << ',' << csv_field(dataset) << ','
            << format_number(report.mean_loss);
        for (double cov : report.coverage_by_level) {
            out << ',' << format_number(cov);
        }
        out << "\n";
    }
    if (!out) {
        throw std::runtime_error("failed writing " + path);
    }
}

void write_calibration_csv(const std::string& path, const BacktestReport& report) {
    std::ofstream out = open_out(path);
    out << "level,coverage,abs_error\n";
    for (std::size_t i = 0; i < report.levels.size(); ++i) {
        out << format_number(report.levels[i]) << ',' << format_number(report.coverage_by_level[i])
            << ',' << format_number(report.calibration_error[i]) << "\n";
    }
    if (!out) {
        throw std::runtime_error("failed writing " + path);
    }
}

void write_tune_csv(const std::string& path, const TuneResult& result) {
    std::ofstream out = open_out(path);
    out << "candidate,mean_quantile_loss,selected,error\n";
    for (std::size_t i = 0; i < result.scores.size(); ++i) {
        const CandidateScore& entry = result.scores[i];
        out << csv_field(entry.label) << ','
            << (entry.failed ? std::string{} : format_number(entry.score)) << ','
            << (i == result.best_index && !entry.failed ? 1 : 0) << ',' << csv_field(entry.error)
            << "\n";
    }
    if (!out) {
        throw std::runtime_error("failed writing " + path);
    }
}

void write_histogram_csv(const std::string& path, const std::vector<HistogramBin>& bins) {
    std::ofstream out = open_out(path);
    out << "bin_left,bin_right,count\n";
    for (const HistogramBin& bin : bins) {
        out << format_number(bin.left) << ',' << format_number(bin.right) << ',' << bin.count
            << "\n";
    }
    if (!out) {
        throw std::runtime_error("failed writing " + path);
    }
}

} // namespace npts
