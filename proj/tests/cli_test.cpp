#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "npts/dataset.hpp"

using namespace npts;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string cli_path() {
    const char* path = std::getenv("NPTS_CLI_BIN");
    REQUIRE_MESSAGE(path != nullptr, "NPTS_CLI_BIN must point at the CLI binary");
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out = fs::path("cli_scratch") / ("stdout_" + std::to_string(counter) + ".txt");
    const fs::path err = fs::path("cli_scratch") / ("stderr_" + std::to_string(counter) + ".txt");
    ++counter;
    fs::create_directories("cli_scratch");
    const std::string command =
        cli_path() + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(command.c_str());
    RunResult result;
    result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out);
    result.err = slurp(err);
    return result;
}

/// Shared hourly dataset generated once through the synth subcommand.
const std::string& dataset() {
    static const std::string path = [] {
        fs::create_directories("cli_scratch");
        const std::string file = "cli_scratch/panel.jsonl";
        const RunResult r = run_cli("synth --kind sinusoid --num-series 3 --length 120 --freq H "
                                    "--period 24 --noise 0.2 --seed 7 --out " +
                                    file);
        REQUIRE(r.code == 0);
        return file;
    }();
    return path;
}

} // namespace

TEST_CASE("synth writes a loadable dataset") {
    DatasetManifest manifest;
    manifest.path = dataset();
    manifest.freq = Frequency::parse("H");
    const LoadResult loaded = load_dataset(manifest);
    CHECK(loaded.errors.empty());
    REQUIRE(loaded.series.size() == 3);
    CHECK(loaded.series[0].length() == 120);
}

TEST_CASE("forecast emits per-series quantile curves inside the observed range") {
    const RunResult r = run_cli("forecast --data " + dataset() +
                                " --freq H --prediction-length 12 --model npts-uniform "
                                "--samples 200 --seed 3 --out-dir cli_scratch/fc --emit-samples");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto records = read_forecasts_jsonl("cli_scratch/fc/forecasts.jsonl");
    REQUIRE(records.size() == 3);

    DatasetManifest manifest;
    manifest.path = dataset();
    manifest.freq = Frequency::parse("H");
    const LoadResult loaded = load_dataset(manifest);
    for (const auto& record : records) {
        const TimeSeries* series = nullptr;
        for (const auto& candidate : loaded.series) {
            if (candidate.id == record.series_id) {
                series = &candidate;
            }
        }
        REQUIRE(series != nullptr);
        const double lo = *std::min_element(series->values.begin(), series->values.end());
        const double hi = *std::max_element(series->values.begin(), series->values.end());
        REQUIRE(!record.quantiles.empty());
        for (const auto& [level, curve] : record.quantiles) {
            REQUIRE(curve.size() == 12);
            for (const double q : curve) {
                CHECK(q >= lo - 1e-4);
                CHECK(q <= hi + 1e-4);
            }
        }
        REQUIRE(record.samples.size() == 200);
    }
}

TEST_CASE("forecast output is byte-identical across reruns") {
    const std::string args = "forecast --data " + dataset() +
                             " --freq H --prediction-length 6 --model npts-exp --lambda 0.5 "
                             "--samples 100 --seed 11 --out-dir ";
    REQUIRE(run_cli(args + "cli_scratch/det_a").code == 0);
    REQUIRE(run_cli(args + "cli_scratch/det_b").code == 0);
    const std::string a = slurp("cli_scratch/det_a/forecasts.jsonl");
    const std::string b = slurp("cli_scratch/det_b/forecasts.jsonl");
    CHECK(a == b);
    CHECK(!a.empty());
}

TEST_CASE("backtest writes metrics, calibration and tuning scores") {
    const RunResult r = run_cli("backtest --data " + dataset() +
                                " --freq H --prediction-length 6 --num-windows 2 --model npts-exp "
                                "--samples 100 --seed 5 --out-dir cli_scratch/bt");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("mean_quantile_loss=") != std::string::npos);

    const std::string metrics = slurp("cli_scratch/bt/metrics.csv");
    CHECK(metrics.find("model,dataset,mean_quantile_loss") == 0);
    CHECK(metrics.find("panel.jsonl") != std::string::npos);

    const std::string calibration = slurp("cli_scratch/bt/calibration.csv");
    CHECK(calibration.find("level,coverage,abs_error") == 0);

    const std::string scores = slurp("cli_scratch/bt/tune_scores.csv");
    CHECK(scores.find("candidate,mean_quantile_loss,selected,error") == 0);
    // Header plus one row per lambda in the grid.
    CHECK(std::count(scores.begin(), scores.end(), '\n') == 6);
}

TEST_CASE("tune reports the winning candidate") {
    const RunResult r = run_cli("tune --data " + dataset() +
                                " --freq H --prediction-length 6 --num-windows 2 --model npts-exp "
                                "--samples 100 --seed 5 --out-dir cli_scratch/tn");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("best=npts-exp(lambda=") != std::string::npos);
    CHECK(fs::exists("cli_scratch/tn/tune_scores.csv"));
}

TEST_CASE("probe probabilities sum to one") {
    const RunResult r = run_cli("probe --data " + dataset() +
                                " --freq H --model seasonal-npts-exp --lambda 1.0 "
                                "--out-dir cli_scratch/pr");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    std::ifstream in("cli_scratch/pr/probe.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "timestamp,value,probability");
    double total = 0.0;
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        const auto last_comma = line.rfind(',');
        REQUIRE(last_comma != std::string::npos);
        total += std::stod(line.substr(last_comma + 1));
        ++rows;
    }
    CHECK(rows == 120);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("histogram bins the pooled values") {
    const RunResult r = run_cli("histogram --data " + dataset() +
                                " --freq H --bins 8 --out-dir cli_scratch/hg");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const std::string text = slurp("cli_scratch/hg/histogram.csv");
    CHECK(text.find("bin_left,bin_right,count") == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 9);
}

TEST_CASE("deepnpts trains, saves and reloads through the CLI") {
    const RunResult trained =
        run_cli("forecast --data " + dataset() +
                " --freq H --prediction-length 4 --model deepnpts --context-multiplier 6 "
                "--epochs 5 --samples 50 --seed 9 --out-dir cli_scratch/dn "
                "--save-model cli_scratch/dn/model.bin");
    REQUIRE_MESSAGE(trained.code == 0, trained.err);
    REQUIRE(fs::exists("cli_scratch/dn/model.bin"));

    const RunResult reused =
        run_cli("forecast --data " + dataset() +
                " --freq H --prediction-length 4 --model deepnpts --samples 50 --seed 9 "
                "--out-dir cli_scratch/dn2 --load-model cli_scratch/dn/model.bin");
    REQUIRE_MESSAGE(reused.code == 0, reused.err);
    CHECK(slurp("cli_scratch/dn/forecasts.jsonl") == slurp("cli_scratch/dn2/forecasts.jsonl"));
}

TEST_CASE("exit codes distinguish usage from runtime failures") {
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("").code == 2);                     // a subcommand is required
    CHECK(run_cli("forecast --freq H").code == 2);    // --data is required
    CHECK(run_cli("forecast --data missing.jsonl --freq H").code == 2);
    CHECK(run_cli("forecast --data " + dataset() + " --freq H --model nope").code == 2);
    CHECK(run_cli("forecast --data " + dataset() + " --freq H --model npts-uniform --lambda 2")
              .code == 2);

    std::ofstream bad("cli_scratch/bad.jsonl");
    bad << R"({"item_id":"x","start":"2015-01-01","target":[1,"oops"]})" << "\n";
    bad.close();
    const RunResult broken = run_cli("forecast --data cli_scratch/bad.jsonl --freq H");
    CHECK(broken.code == 1);
    CHECK(broken.err.find("line 1") != std::string::npos);
}
