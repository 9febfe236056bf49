// poolcast: command-line front end for the warm-pool provisioning engine.
//
// Subcommands: gen-trace, simulate, optimize, forecast, sweep,
// compare-static, serve. Exit codes: 0 success, 64 usage error,
// 1 runtime error (with a single machine-readable `error: ...` line).

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "poolcast/forecaster.hpp"
#include "poolcast/optimizer.hpp"
#include "poolcast/pipeline.hpp"
#include "poolcast/service.hpp"
#include "poolcast/simulator.hpp"
#include "poolcast/trace.hpp"

namespace {

constexpr int kExitUsage = 64;

struct CommonOpts {
    std::string trace_path;
    std::string out_path;
    double alpha_prime = 0.5;
    int tau = 4;
    double min_pool = 0.0;
    double max_pool = 100.0;
    int block = 10;
    int horizon = 120;
    std::string mode = "two_step";
    std::uint64_t seed = 0;
    double target_wait = -1.0;
    std::int64_t run_interval = 1800;
};

void add_optimizer_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--alpha-prime", o.alpha_prime, "idle-vs-wait weight in [0, 1]")
        ->envname("POOLCAST_ALPHA_PRIME");
    cmd->add_option("--tau", o.tau, "cluster initialization latency, intervals")
        ->envname("POOLCAST_TAU");
    cmd->add_option("--min-pool", o.min_pool, "pool size lower bound")
        ->envname("POOLCAST_MIN_POOL");
    cmd->add_option("--max-pool", o.max_pool, "pool size upper bound")
        ->envname("POOLCAST_MAX_POOL");
    cmd->add_option("--block", o.block, "stableness block length, intervals")
        ->envname("POOLCAST_BLOCK");
}

poolcast::OptimizerConfig optimizer_config(const CommonOpts& o) {
    poolcast::OptimizerConfig cfg;
    cfg.alpha_prime = o.alpha_prime;
    cfg.tau_intervals = o.tau;
    cfg.min_pool = o.min_pool;
    cfg.max_pool = o.max_pool;
    cfg.stableness_intervals = o.block;
    return cfg;
}

poolcast::PipelineConfig pipeline_config(const CommonOpts& o) {
    poolcast::PipelineConfig cfg;
    cfg.mode = poolcast::parse_mode(o.mode);
    cfg.optimizer = optimizer_config(o);
    cfg.horizon_intervals = o.horizon;
    cfg.training.seed = o.seed;
    return cfg;
}

void emit(const nlohmann::json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream os(out_path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open output file " + out_path);
    os << j.dump(2) << '\n';
}

std::vector<double> parse_alphas(const std::string& csv) {
    std::vector<double> alphas;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) alphas.push_back(std::stod(tok));
    }
    if (alphas.empty()) throw std::runtime_error("--alphas must list at least one value");
    return alphas;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"poolcast: warm-pool demand forecasting and provisioning"};
    app.require_subcommand(1);

    CommonOpts o;
    poolcast::SyntheticTraceSpec spec;
    std::string pattern = "constant";
    std::string future_path;
    std::string metrics_path;
    std::string tuner_state_path;
    std::string alphas_csv = "0,0.25,0.5,0.75,1";
    double pool = 0.0;
    double target_hit_rate = 0.99;
    std::int64_t default_pool = 0;
    int max_cycles = 0;
    int steps = 120;
    int window = 150;

    auto* gen = app.add_subcommand("gen-trace", "generate a synthetic demand trace CSV");
    gen->add_option("--pattern", pattern,
                    "constant|diurnal|hourly_spikes|sporadic_spikes");
    gen->add_option("--base-rate", spec.base_rate, "baseline requests/interval");
    gen->add_option("--peak-rate", spec.peak_rate, "peak requests/interval");
    gen->add_option("--period", spec.period_intervals, "pattern period, intervals");
    gen->add_option("--horizon", spec.horizon_intervals, "trace length, intervals")
        ->required();
    gen->add_option("--seed", spec.noise_seed, "Poisson noise seed")
        ->envname("POOLCAST_SEED");
    gen->add_option("--interval", spec.interval_seconds, "interval width, seconds");
    gen->add_option("--out", o.out_path, "output CSV path")->required();

    auto* sim = app.add_subcommand("simulate", "replay a constant pool against a trace");
    sim->add_option("--trace", o.trace_path, "demand trace CSV")
        ->required()
        ->envname("POOLCAST_TRACE");
    sim->add_option("--pool", pool, "constant pool size")->required();
    sim->add_option("--out", o.out_path, "report JSON path (default stdout)");
    add_optimizer_flags(sim, o);

    auto* opt = app.add_subcommand("optimize", "solve the provisioning LP for a trace");
    opt->add_option("--trace", o.trace_path, "demand trace CSV")
        ->required()
        ->envname("POOLCAST_TRACE");
    opt->add_option("--out", o.out_path, "solution JSON path (default stdout)");
    add_optimizer_flags(opt, o);

    auto* fc = app.add_subcommand("forecast", "train SSA+ on a trace and forecast demand");
    fc->add_option("--trace", o.trace_path, "demand trace CSV")
        ->required()
        ->envname("POOLCAST_TRACE");
    fc->add_option("--steps", steps, "forecast length, intervals");
    fc->add_option("--window", window, "SSA window length L");
    fc->add_option("--seed", o.seed, "training seed")->envname("POOLCAST_SEED");
    fc->add_option("--out", o.out_path, "forecast CSV path (default stdout)");

    auto* sweep = app.add_subcommand("sweep", "Pareto sweep over alpha' values");
    sweep->add_option("--trace", o.trace_path, "training history CSV")
        ->required()
        ->envname("POOLCAST_TRACE");
    sweep->add_option("--future", future_path, "evaluation trace CSV")->required();
    sweep->add_option("--alphas", alphas_csv, "comma-separated alpha' list");
    sweep->add_option("--mode", o.mode, "two_step|e2e")->envname("POOLCAST_MODE");
    sweep->add_option("--horizon", o.horizon, "recommendation horizon, intervals")
        ->envname("POOLCAST_HORIZON");
    sweep->add_option("--seed", o.seed, "training seed")->envname("POOLCAST_SEED");
    sweep->add_option("--out", o.out_path, "report CSV path")->required();
    add_optimizer_flags(sweep, o);

    auto* cmp = app.add_subcommand("compare-static",
                                   "dynamic pipeline vs best static pool at a hit-rate target");
    cmp->add_option("--trace", o.trace_path, "training history CSV")
        ->required()
        ->envname("POOLCAST_TRACE");
    cmp->add_option("--future", future_path, "evaluation trace CSV")->required();
    cmp->add_option("--target-hit-rate", target_hit_rate, "hit-rate floor in (0, 1]");
    cmp->add_option("--mode", o.mode, "two_step|e2e")->envname("POOLCAST_MODE");
    cmp->add_option("--horizon", o.horizon, "recommendation horizon, intervals")
        ->envname("POOLCAST_HORIZON");
    cmp->add_option("--seed", o.seed, "training seed")->envname("POOLCAST_SEED");
    cmp->add_option("--out", o.out_path, "summary JSON path (default stdout)");
    add_optimizer_flags(cmp, o);

    auto* serve = app.add_subcommand("serve", "continuous recommendation loop");
    serve->add_option("--trace", o.trace_path, "demand trace CSV (re-read each cycle)")
        ->required()
        ->envname("POOLCAST_TRACE");
    serve->add_option("--out", o.out_path, "recommendation file path")->required();
    serve->add_option("--metrics", metrics_path, "metrics NDJSON path")->required();
    serve->add_option("--run-interval", o.run_interval, "seconds between cycles")
        ->envname("POOLCAST_RUN_INTERVAL");
    serve->add_option("--horizon", o.horizon, "recommendation horizon, intervals")
        ->envname("POOLCAST_HORIZON");
    serve->add_option("--default-pool", default_pool, "fallback pool size");
    serve->add_option("--max-cycles", max_cycles, "stop after N cycles (0 = forever)");
    serve->add_option("--mode", o.mode, "two_step|e2e")->envname("POOLCAST_MODE");
    serve->add_option("--seed", o.seed, "training seed")->envname("POOLCAST_SEED");
    serve->add_option("--target-wait", o.target_wait,
                      "tuner wait target, seconds (< 0 disables)")
        ->envname("POOLCAST_TARGET_WAIT");
    serve->add_option("--tuner-state", tuner_state_path, "tuner state JSON path");
    add_optimizer_flags(serve, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen->parsed()) {
            spec.pattern = poolcast::parse_pattern(pattern);
            poolcast::write_trace(poolcast::generate_trace(spec), o.out_path);
            return 0;
        }

        if (sim->parsed()) {
            auto trace = poolcast::read_trace(o.trace_path);
            auto schedule = poolcast::PoolSchedule::constant(
                pool, trace.horizon(), trace.interval_seconds, o.min_pool,
                std::max(o.max_pool, pool));
            poolcast::SimulatorConfig cfg;
            cfg.tau_intervals = o.tau;
            auto rep = poolcast::simulate(trace, schedule, cfg);
            nlohmann::json j;
            j["total_idle_seconds"] =
                rep.total_idle_intervals * static_cast<double>(trace.interval_seconds);
            j["total_wait_seconds"] =
                rep.total_wait_intervals * static_cast<double>(trace.interval_seconds);
            j["hit_count"] = rep.hit_count;
            j["miss_count"] = rep.miss_count;
            j["hit_rate"] = rep.hit_rate;
            emit(j, o.out_path);
            return 0;
        }

        if (opt->parsed()) {
            auto trace = poolcast::read_trace(o.trace_path);
            auto sol = poolcast::optimize(trace, optimizer_config(o));
            nlohmann::json j;
            j["objective"] = sol.objective;
            j["block_values"] = sol.schedule.block_values();
            j["rounded_block_values"] = sol.rounded_schedule.block_values();
            emit(j, o.out_path);
            return 0;
        }

        if (fc->parsed()) {
            auto trace = poolcast::read_trace(o.trace_path);
            std::vector<double> series(trace.counts.begin(), trace.counts.end());
            poolcast::TrainingConfig training;
            training.seed = o.seed;
            training.horizon = steps;
            auto ssa = poolcast::ssa_fit(series, window);
            auto corrector = poolcast::train_hybrid(series, ssa, training);
            auto forecast = poolcast::predict_hybrid(ssa, corrector, series, steps);
            std::ostringstream csv;
            csv << "step,forecast\n";
            for (std::size_t i = 0; i < forecast.size(); ++i)
                csv << i << ',' << forecast[i] << '\n';
            if (o.out_path.empty()) {
                std::cout << csv.str();
            } else {
                std::ofstream os(o.out_path, std::ios::trunc);
                if (!os) throw std::runtime_error("cannot open output file " + o.out_path);
                os << csv.str();
            }
            return 0;
        }

        if (sweep->parsed()) {
            auto history = poolcast::read_trace(o.trace_path);
            auto future = poolcast::read_trace(future_path);
            auto report = poolcast::pareto_sweep(history, future, pipeline_config(o),
                                                 parse_alphas(alphas_csv));
            poolcast::write_report_csv(report, o.out_path);
            return 0;
        }

        if (cmp->parsed()) {
            auto history = poolcast::read_trace(o.trace_path);
            auto future = poolcast::read_trace(future_path);
            auto result = poolcast::compare_static(history, future, pipeline_config(o),
                                                   target_hit_rate);
            nlohmann::json j;
            j["static_pool"] = result.static_pool;
            j["alpha_prime"] = result.alpha_prime;
            j["idle_reduction"] = result.idle_reduction;
            j["static_idle_seconds"] = result.static_point.idle_seconds;
            j["dynamic_idle_seconds"] = result.dynamic_point.idle_seconds;
            j["static_hit_rate"] = result.static_point.hit_rate;
            j["dynamic_hit_rate"] = result.dynamic_point.hit_rate;
            emit(j, o.out_path);
            return 0;
        }

        if (serve->parsed()) {
            poolcast::ServiceConfig cfg;
            cfg.run_interval_seconds = o.run_interval;
            cfg.recommendation_horizon_intervals = o.horizon;
            cfg.default_pool_size = default_pool;
            cfg.trace_path = o.trace_path;
            cfg.recommendation_path = o.out_path;
            cfg.metrics_path = metrics_path;
            cfg.tuner_state_path = tuner_state_path;
            cfg.target_wait_seconds = o.target_wait;
            cfg.pipeline = pipeline_config(o);
            cfg.max_cycles = max_cycles;
            poolcast::ServiceLoop loop(cfg);
            loop.run();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
