#include <stdexcept>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "poolcast/optimizer.hpp"
#include "poolcast/trace.hpp"

// Subprocess tests against the installed binary; POOLCAST_CLI_PATH is
// injected by the build.

namespace {

struct CliResult {
    int exit_code = -1;
    std::string stdout_text;
};

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const auto out = std::filesystem::temp_directory_path() /
                     ("poolcast_cli_out_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++) + ".txt");
    const std::string command =
        std::string(POOLCAST_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    const int raw = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream is(out);
    std::stringstream ss;
    ss << is.rdbuf();
    result.stdout_text = ss.str();
    std::filesystem::remove(out);
    return result;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("poolcast_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("usage errors take the distinct exit code") {
    CHECK(run_cli("").exit_code == 64);
    CHECK(run_cli("no-such-command").exit_code == 64);
    CHECK(run_cli("simulate --pool 1").exit_code == 64);  // missing --trace
    CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("runtime errors exit 1 with an error line") {
    auto r = run_cli("simulate --trace /nonexistent.csv --pool 1");
    CHECK(r.exit_code == 1);
    CHECK(r.stdout_text.rfind("error:", 0) == 0);
}

TEST_CASE("gen-trace then simulate: zero demand is pure idle") {
    TempDir dir;
    REQUIRE(run_cli("gen-trace --pattern constant --base-rate 0 --peak-rate 0 "
                    "--horizon 20 --out " +
                    dir.file("zero.csv"))
                .exit_code == 0);

    auto r = run_cli("simulate --trace " + dir.file("zero.csv") + " --pool 1 --tau 2");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.stdout_text);
    // pool of 1 idles through all 20 intervals of 30 s; nothing ever waits
    CHECK(j.at("total_idle_seconds").get<double>() == 20.0 * 30.0);
    CHECK(j.at("total_wait_seconds").get<double>() == 0.0);
    CHECK(j.at("miss_count").get<int>() == 0);
    CHECK(j.at("hit_rate").get<double>() == 1.0);
}

TEST_CASE("optimize matches the exhaustive oracle on the T=6 fixture") {
    TempDir dir;
    poolcast::DemandTrace demand;
    demand.interval_seconds = 30;
    demand.counts = {2, 0, 3, 1, 0, 2};
    poolcast::write_trace(demand, dir.file("demand.csv"));

    poolcast::OptimizerConfig cfg;
    cfg.alpha_prime = 0.6;
    cfg.tau_intervals = 1;
    cfg.min_pool = 0;
    cfg.max_pool = 3;
    cfg.stableness_intervals = 6;
    const double oracle = testing_helpers::enumerate_best_objective(demand, cfg);

    auto r = run_cli("optimize --trace " + dir.file("demand.csv") +
                     " --alpha-prime 0.6 --tau 1 --min-pool 0 --max-pool 3 --block 6");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.stdout_text);
    CHECK(j.at("objective").get<double>() == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(j.at("block_values").size() == 1);
    CHECK(j.at("rounded_block_values").size() == 1);
}

TEST_CASE("sweep emits the exact CSV schema with baseline row") {
    TempDir dir;
    REQUIRE(run_cli("gen-trace --pattern diurnal --base-rate 1 --peak-rate 5 --period 24 "
                    "--horizon 96 --seed 4 --out " +
                    dir.file("history.csv"))
                .exit_code == 0);
    REQUIRE(run_cli("gen-trace --pattern diurnal --base-rate 1 --peak-rate 5 --period 24 "
                    "--horizon 48 --seed 5 --out " +
                    dir.file("future.csv"))
                .exit_code == 0);

    auto r = run_cli("sweep --trace " + dir.file("history.csv") + " --future " +
                     dir.file("future.csv") +
                     " --alphas 0,0.5,1 --tau 2 --block 12 --max-pool 20 --horizon 24 "
                     "--mode two_step --out " +
                     dir.file("report.csv"));
    REQUIRE(r.exit_code == 0);

    std::ifstream is(dir.file("report.csv"));
    std::string header;
    REQUIRE(std::getline(is, header));
    CHECK(header == "alpha_prime,idle_seconds,wait_seconds,avg_wait_seconds,hit_rate,"
                    "is_baseline");
    int rows = 0;
    int baseline_rows = 0;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        ++rows;
        if (line.size() >= 2 && line.substr(line.size() - 2) == ",1") ++baseline_rows;
    }
    CHECK(rows == 4);  // 3 alphas + the static baseline
    CHECK(baseline_rows == 1);
}

TEST_CASE("serve runs bounded cycles and leaves a readable recommendation") {
    TempDir dir;
    REQUIRE(run_cli("gen-trace --pattern constant --base-rate 3 --peak-rate 3 "
                    "--horizon 240 --seed 7 --out " +
                    dir.file("trace.csv"))
                .exit_code == 0);

    auto r = run_cli("serve --trace " + dir.file("trace.csv") + " --out " +
                     dir.file("rec.json") + " --metrics " + dir.file("metrics.ndjson") +
                     " --run-interval 60 --horizon 24 --tau 2 --block 12 --max-pool 20 "
                     "--max-cycles 1");
    REQUIRE(r.exit_code == 0);

    std::ifstream rec(dir.file("rec.json"));
    nlohmann::json j;
    rec >> j;
    CHECK(j.at("version").get<int>() == 1);
    CHECK(j.at("source_mode").get<std::string>() == "two_step");
    CHECK(j.at("schedule").size() == 2);

    std::ifstream metrics(dir.file("metrics.ndjson"));
    std::string line;
    REQUIRE(std::getline(metrics, line));
    CHECK(nlohmann::json::parse(line).at("status").get<std::string>() == "succeeded");
}
