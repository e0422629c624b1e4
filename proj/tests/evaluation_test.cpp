#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "helpers.hpp"
#include "npts/evaluation.hpp"
#include "npts/forecaster.hpp"
#include "npts/format.hpp"
#include "npts/kernels.hpp"
#include "npts/models.hpp"
#include "npts/rng.hpp"
#include "npts/synth.hpp"

using namespace npts;
using npts::testing::hourly;
using npts::testing::make_series;

namespace {

std::vector<TimeSeries> random_walk_panel(std::size_t count, std::size_t length,
                                          std::uint64_t seed) {
    SynthSpec spec;
    spec.kind = SynthKind::RandomWalk;
    spec.num_series = count;
    spec.length = length;
    spec.freq = hourly();
    spec.noise = 1.0;
    spec.seed = seed;
    return make_synthetic(spec);
}

ModelCandidate kernel_candidate(KernelKind kind, double lambda) {
    KernelSpec spec;
    spec.kind = kind;
    spec.lambda = lambda;
    spec.freq = hourly();
    ModelCandidate candidate;
    candidate.label = kernel_kind_str(kind);
    candidate.build = [spec](const std::vector<TimeSeries>&) {
        return std::make_unique<NptsForecaster>(spec);
    };
    return candidate;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace

TEST_CASE("quantile loss matches the worked examples") {
    CHECK(quantile_loss(2.0, 2.0, 0.5) == doctest::Approx(0.0));
    CHECK(quantile_loss(1.0, 2.0, 0.9) == doctest::Approx(0.9));
    CHECK(quantile_loss(2.0, 1.0, 0.9) == doctest::Approx(0.1));
    CHECK_THROWS_AS(quantile_loss(1.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(quantile_loss(1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("quantile loss is proper for the target quantile") {
    // Minimizing expected pinball loss over a discrete sample recovers a value
    // between the order statistics around the requested level.
    const std::vector<double> sample{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const double level = 0.8;
    auto expected_loss = [&](double q) {
        double total = 0.0;
        for (const double z : sample) {
            total += quantile_loss(q, z, level);
        }
        return total;
    };
    const double at_quantile = expected_loss(8.0);
    for (const double q : {2.0, 5.0, 9.9, 11.0}) {
        CHECK(at_quantile <= expected_loss(q) + 1e-12);
    }
}

TEST_CASE("normalized mean quantile loss follows the 19-level example") {
    const auto levels = default_quantile_levels();
    const std::vector<std::vector<double>> predicted{std::vector<double>(19, 8.0)};
    const std::vector<double> actuals{10.0};
    bool unnormalized = true;
    const double value = mean_quantile_loss(levels, predicted, actuals, &unnormalized);
    CHECK(value == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_FALSE(unnormalized);
}

TEST_CASE("perfect forecasts score zero") {
    const auto levels = default_quantile_levels();
    const std::vector<std::vector<double>> predicted{std::vector<double>(19, 3.0),
                                                     std::vector<double>(19, -2.0)};
    const std::vector<double> actuals{3.0, -2.0};
    CHECK(mean_quantile_loss(levels, predicted, actuals) == doctest::Approx(0.0));
}

TEST_CASE("normalized loss is invariant under positive rescaling") {
    const auto levels = default_quantile_levels();
    Rng rng(3);
    std::vector<std::vector<double>> predicted;
    std::vector<double> actuals;
    for (int i = 0; i < 20; ++i) {
        std::vector<double> row;
        for (std::size_t k = 0; k < levels.size(); ++k) {
            row.push_back(rng.normal() + 10.0);
        }
        std::sort(row.begin(), row.end());
        predicted.push_back(row);
        actuals.push_back(rng.normal() + 10.0);
    }
    const double base = mean_quantile_loss(levels, predicted, actuals);

    const double factor = 12.5;
    std::vector<std::vector<double>> scaled_pred = predicted;
    std::vector<double> scaled_act = actuals;
    for (auto& row : scaled_pred) {
        for (double& q : row) {
            q *= factor;
        }
    }
    for (double& z : scaled_act) {
        z *= factor;
    }
    CHECK(mean_quantile_loss(levels, scaled_pred, scaled_act) ==
          doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("all-zero actuals fall back to the unnormalized mean") {
    const auto levels = default_quantile_levels();
    const std::vector<std::vector<double>> predicted{std::vector<double>(19, 1.0)};
    const std::vector<double> actuals{0.0};
    bool unnormalized = false;
    const double value = mean_quantile_loss(levels, predicted, actuals, &unnormalized);
    CHECK(unnormalized);
    // Each level loses (level - 1)(0 - 1) = 1 - level; mean over 19 levels is 0.5.
    CHECK(value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("accumulator merge equals pooled accumulation") {
    const auto levels = default_quantile_levels();
    Rng rng(8);
    EvalAccumulator pooled;
    EvalAccumulator left;
    EvalAccumulator right;
    for (int i = 0; i < 30; ++i) {
        std::vector<double> row;
        for (std::size_t k = 0; k < levels.size(); ++k) {
            row.push_back(rng.normal());
        }
        std::sort(row.begin(), row.end());
        const double actual = rng.normal();
        pooled.add(levels, row, actual);
        (i % 2 == 0 ? left : right).add(levels, row, actual);
    }
    left.merge(right);
    CHECK(left.points() == pooled.points());
    CHECK(left.value() == doctest::Approx(pooled.value()).epsilon(1e-12));

    EvalAccumulator empty;
    CHECK_THROWS_AS(empty.value(), std::runtime_error);
}

TEST_CASE("coverage counts actuals at or below the quantile") {
    CHECK(coverage(std::vector<double>{10, 10, 10}, std::vector<double>{1, 2, 3}) ==
          doctest::Approx(1.0));
    CHECK(coverage(std::vector<double>{0, 0, 0}, std::vector<double>{1, 2, 3}) ==
          doctest::Approx(0.0));
    CHECK(coverage(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) ==
          doctest::Approx(1.0)); // ties are covered
    CHECK(coverage(std::vector<double>{1.5, 1.5}, std::vector<double>{1, 2}) ==
          doctest::Approx(0.5));
    CHECK_THROWS_AS(coverage(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
}

TEST_CASE("coverage of a constant quantile on uniform actuals matches its level") {
    Rng rng(99);
    const double level = 0.35;
    std::vector<double> predicted;
    std::vector<double> actuals;
    for (int i = 0; i < 100000; ++i) {
        predicted.push_back(level);
        actuals.push_back(rng.uniform());
    }
    CHECK(std::abs(coverage(predicted, actuals) - level) <= 0.01);
}

TEST_CASE("forecast seeds differ across series and windows but are stable") {
    CHECK(forecast_seed(1, 0, 0) == forecast_seed(1, 0, 0));
    CHECK(forecast_seed(1, 0, 0) != forecast_seed(1, 0, 1));
    CHECK(forecast_seed(1, 0, 0) != forecast_seed(1, 1, 0));
    CHECK(forecast_seed(1, 0, 0) != forecast_seed(2, 0, 0));
}

TEST_CASE("single-window backtest reduces to a train/test split") {
    const auto panel = random_walk_panel(3, 60, 17);
    BacktestPlan plan;
    plan.prediction_length = 5;
    plan.num_windows = 1;
    plan.num_samples = 200;
    plan.seed = 4;
    const ModelCandidate candidate = kernel_candidate(KernelKind::Uniform, 1.0);
    const BacktestReport report = rolling_backtest(panel, candidate, plan);

    // Oracle: forecast each truncated series directly and pool the losses.
    EvalAccumulator oracle;
    std::vector<std::vector<double>> coverage_counts(plan.quantile_levels.size());
    for (std::size_t s = 0; s < panel.size(); ++s) {
        TimeSeries context = panel[s];
        context.values.resize(panel[s].length() - plan.prediction_length);
        KernelSpec spec;
        spec.kind = KernelKind::Uniform;
        spec.freq = hourly();
        ForecastOptions options;
        options.horizon = plan.prediction_length;
        options.num_samples = plan.num_samples;
        options.seed = forecast_seed(plan.seed, s, 0);
        options.quantile_levels = plan.quantile_levels;
        const ForecastResult result = NptsForecaster(spec).forecast(context, options);
        for (std::size_t h = 0; h < plan.prediction_length; ++h) {
            std::vector<double> row;
            for (const double level : plan.quantile_levels) {
                row.push_back(result.quantile_curves.at(level)[h]);
            }
            oracle.add(plan.quantile_levels, row, panel[s].values[context.length() + h]);
        }
    }
    CHECK(report.mean_loss == doctest::Approx(oracle.value()).epsilon(1e-12));
    CHECK(report.per_series_loss.size() == panel.size());
}

TEST_CASE("seasonal-naive scores zero on noiseless periodic data") {
    SynthSpec spec;
    spec.kind = SynthKind::Sinusoid;
    spec.num_series = 2;
    spec.length = 24 * 8;
    spec.freq = hourly();
    spec.period = 24.0;
    spec.noise = 0.0;
    spec.seed = 5;
    const auto panel = make_synthetic(spec);

    BacktestPlan plan;
    plan.prediction_length = 24;
    plan.num_windows = 2;
    plan.num_samples = 50;
    ModelCandidate candidate;
    candidate.label = "seasonal-naive";
    candidate.build = [](const std::vector<TimeSeries>&) {
        return std::make_unique<SeasonalNaiveForecaster>(hourly());
    };
    const BacktestReport report = rolling_backtest(panel, candidate, plan);
    CHECK(report.mean_loss == doctest::Approx(0.0));
}

TEST_CASE("recency-weighted kernels beat uniform on random walks") {
    const auto panel = random_walk_panel(20, 160, 23);
    BacktestPlan plan;
    plan.prediction_length = 1;
    plan.num_windows = 30;
    plan.num_samples = 300;
    plan.seed = 9;
    const BacktestReport uniform =
        rolling_backtest(panel, kernel_candidate(KernelKind::Uniform, 1.0), plan);
    const BacktestReport exponential =
        rolling_backtest(panel, kernel_candidate(KernelKind::Exponential, 1.0), plan);
    CHECK(exponential.mean_loss < uniform.mean_loss);
}

TEST_CASE("backtest validates series length and names the offender") {
    const auto panel = random_walk_panel(1, 10, 2);
    BacktestPlan plan;
    plan.prediction_length = 5;
    plan.num_windows = 2;
    try {
        (void)rolling_backtest(panel, kernel_candidate(KernelKind::Uniform, 1.0), plan);
        FAIL("expected a length error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(panel[0].id) != std::string::npos);
    }
}

TEST_CASE("coverage is monotone in the level on a real backtest") {
    const auto panel = random_walk_panel(5, 80, 31);
    BacktestPlan plan;
    plan.prediction_length = 4;
    plan.num_windows = 3;
    plan.num_samples = 400;
    const BacktestReport report =
        rolling_backtest(panel, kernel_candidate(KernelKind::Uniform, 1.0), plan);
    REQUIRE(report.coverage_by_level.size() == report.levels.size());
    for (std::size_t k = 1; k < report.coverage_by_level.size(); ++k) {
        CHECK(report.coverage_by_level[k] >= report.coverage_by_level[k - 1]);
    }
    for (std::size_t k = 0; k < report.levels.size(); ++k) {
        CHECK(report.calibration_error[k] ==
              doctest::Approx(std::abs(report.coverage_by_level[k] - report.levels[k])));
    }
}

TEST_CASE("tune picks the argmin and keeps first-listed on ties") {
    const auto panel = random_walk_panel(4, 80, 41);
    BacktestPlan plan;
    plan.prediction_length = 2;
    plan.num_windows = 4;
    plan.num_samples = 200;

    ModelFamily family;
    family.name = "test";
    family.candidates.push_back(kernel_candidate(KernelKind::Uniform, 1.0));
    family.candidates.push_back(kernel_candidate(KernelKind::Exponential, 1.0));
    const TuneResult result = tune(family, panel, plan);
    REQUIRE(result.scores.size() == 2);
    std::size_t argmin = result.scores[0].score <= result.scores[1].score ? 0 : 1;
    CHECK(result.best_index == argmin);
    CHECK(result.best_label == result.scores[argmin].label);

    // Identical candidates tie; the first listed must win.
    ModelFamily twins;
    twins.name = "twins";
    twins.candidates.push_back(kernel_candidate(KernelKind::Uniform, 1.0));
    twins.candidates[0].label = "first";
    twins.candidates.push_back(kernel_candidate(KernelKind::Uniform, 1.0));
    twins.candidates[1].label = "second";
    const TuneResult tied = tune(twins, panel, plan);
    CHECK(tied.scores[0].score == doctest::Approx(tied.scores[1].score));
    CHECK(tied.best_index == 0);
    CHECK(tied.best_label == "first");
}

TEST_CASE("tune records failures and falls back to working candidates") {
    const auto panel = random_walk_panel(2, 60, 51);
    BacktestPlan plan;
    plan.prediction_length = 2;
    plan.num_windows = 2;
    plan.num_samples = 100;

    ModelFamily family;
    family.name = "partial";
    ModelCandidate broken;
    broken.label = "broken";
    broken.build = [](const std::vector<TimeSeries>&) -> std::unique_ptr<Forecaster> {
        throw std::runtime_error("cannot build");
    };
    family.candidates.push_back(broken);
    family.candidates.push_back(kernel_candidate(KernelKind::Uniform, 1.0));
    const TuneResult result = tune(family, panel, plan);
    CHECK(result.scores[0].failed);
    CHECK(result.scores[0].error.find("cannot build") != std::string::npos);
    CHECK_FALSE(result.scores[1].failed);
    CHECK(result.best_index == 1);

    ModelFamily hopeless;
    hopeless.name = "hopeless";
    hopeless.candidates.push_back(broken);
    CHECK_THROWS_AS(tune(hopeless, panel, plan), std::runtime_error);
}

TEST_CASE("grid of one selects that configuration") {
    const auto panel = random_walk_panel(2, 50, 61);
    BacktestPlan plan;
    plan.prediction_length = 1;
    plan.num_windows = 2;
    plan.num_samples = 50;
    ModelFamily family;
    family.name = "single";
    family.candidates.push_back(kernel_candidate(KernelKind::Exponential, 0.5));
    const TuneResult result = tune(family, panel, plan);
    CHECK(result.best_index == 0);
    CHECK(result.best_label == family.candidates[0].label);
}

TEST_CASE("histogram covers the range with equal-width bins") {
    std::vector<double> values;
    for (int i = 0; i < 100; ++i) {
        values.push_back(static_cast<double>(i % 10));
    }
    const auto bins = histogram(values, 5);
    REQUIRE(bins.size() == 5);
    CHECK(bins.front().left == doctest::Approx(0.0));
    CHECK(bins.back().right == doctest::Approx(9.0));
    std::size_t total = 0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
        total += bins[i].count;
        CHECK(bins[i].right - bins[i].left == doctest::Approx(9.0 / 5));
        if (i > 0) {
            CHECK(bins[i].left == doctest::Approx(bins[i - 1].right));
        }
    }
    CHECK(total == values.size());

    const auto degenerate = histogram(std::vector<double>{4.0, 4.0}, 3);
    REQUIRE(degenerate.size() == 1);
    CHECK(degenerate[0].count == 2);
    CHECK(degenerate[0].right > degenerate[0].left);

    CHECK_THROWS_AS(histogram(std::vector<double>{}, 3), std::invalid_argument);
    CHECK_THROWS_AS(histogram(values, 0), std::invalid_argument);
}

TEST_CASE("csv writers emit stable headers and one row per entry") {
    const auto panel = random_walk_panel(2, 40, 71);
    BacktestPlan plan;
    plan.prediction_length = 2;
    plan.num_windows = 2;
    plan.num_samples = 50;
    const BacktestReport report =
        rolling_backtest(panel, kernel_candidate(KernelKind::Uniform, 1.0), plan);

    const std::string metrics_path = "eval_metrics_test.csv";
    write_metrics_csv(metrics_path, {report}, "panel.jsonl");
    const std::string metrics = slurp(metrics_path);
    CHECK(metrics.find("model,dataset,mean_quantile_loss,coverage_0.05") == 0);
    CHECK(metrics.find("uniform,panel.jsonl,") != std::string::npos);

    const std::string calibration_path = "eval_calibration_test.csv";
    write_calibration_csv(calibration_path, report);
    const std::string calibration = slurp(calibration_path);
    CHECK(calibration.find("level,coverage,abs_error") == 0);
    CHECK(std::count(calibration.begin(), calibration.end(), '\n') == 20); // header + 19

    ModelFamily family;
    family.name = "grid";
    family.candidates.push_back(kernel_candidate(KernelKind::Uniform, 1.0));
    family.candidates.push_back(kernel_candidate(KernelKind::Exponential, 1.0));
    const TuneResult tuned = tune(family, panel, plan);
    const std::string tune_path = "eval_tune_test.csv";
    write_tune_csv(tune_path, tuned);
    const std::string tune_text = slurp(tune_path);
    CHECK(tune_text.find("candidate,mean_quantile_loss,selected,error") == 0);
    CHECK(std::count(tune_text.begin(), tune_text.end(), '\n') == 3);

    const std::string histogram_path = "eval_histogram_test.csv";
    write_histogram_csv(histogram_path, histogram(panel[0].values, 4));
    const std::string histogram_text = slurp(histogram_path);
    CHECK(histogram_text.find("bin_left,bin_right,count") == 0);
    CHECK(std::count(histogram_text.begin(), histogram_text.end(), '\n') == 5);

    for (const std::string& path :
         {metrics_path, calibration_path, tune_path, histogram_path}) {
        std::remove(path.c_str());
    }
}

TEST_CASE("numbers format consistently at six significant digits") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.5) == "1.5");
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(1234567.0) == "1.23457e+06");
    CHECK(format_number(-0.000123456789) == "-0.000123457");
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
}
