// Python bindings for the poolcast core: trace generation and smoothing, the
// LP optimizer, the pool simulator, the SSA+ forecaster, and the pipeline.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "poolcast/forecaster.hpp"
#include "poolcast/optimizer.hpp"
#include "poolcast/pipeline.hpp"
#include "poolcast/simulator.hpp"
#include "poolcast/trace.hpp"

namespace py = pybind11;
using namespace poolcast;

namespace {

DemandTrace make_trace(const std::vector<std::int64_t>& counts, std::int64_t interval_seconds) {
    DemandTrace trace;
    trace.interval_seconds = interval_seconds;
    trace.counts = counts;
    return trace;
}

OptimizerConfig make_optimizer(double alpha_prime, int tau, double min_pool, double max_pool,
                               int block) {
    OptimizerConfig cfg;
    cfg.alpha_prime = alpha_prime;
    cfg.tau_intervals = tau;
    cfg.min_pool = min_pool;
    cfg.max_pool = max_pool;
    cfg.stableness_intervals = block;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_poolcast, m) {
    m.doc() = "warm-pool demand forecasting and provisioning core";

    m.def(
        "generate_trace",
        [](const std::string& pattern, double base_rate, double peak_rate, int period,
           int horizon, std::uint64_t seed, std::int64_t interval_seconds) {
            SyntheticTraceSpec spec;
            spec.pattern = parse_pattern(pattern);
            spec.base_rate = base_rate;
            spec.peak_rate = peak_rate < 0.0 ? base_rate : peak_rate;
            spec.period_intervals = period;
            spec.horizon_intervals = horizon;
            spec.noise_seed = seed;
            spec.interval_seconds = interval_seconds;
            return generate_trace(spec).counts;
        },
        py::arg("pattern"), py::arg("base_rate"), py::arg("peak_rate") = -1.0,
        py::arg("period") = 120, py::arg("horizon") = 120, py::arg("seed") = 0,
        py::arg("interval_seconds") = 30,
        "Synthetic per-interval demand counts (peak_rate < 0 means base_rate).");

    m.def(
        "max_filter",
        [](const std::vector<double>& series, int smoothing_factor) {
            SmoothingConfig cfg;
            cfg.smoothing_factor = smoothing_factor;
            return max_filter(series, cfg);
        },
        py::arg("series"), py::arg("smoothing_factor"),
        "Max-filter smoothing with half-width round-half-up(SF/2).");

    m.def("read_trace", [](const std::string& path) {
        auto trace = read_trace(path);
        return py::make_tuple(trace.counts, trace.interval_seconds);
    });
    m.def(
        "write_trace",
        [](const std::vector<std::int64_t>& counts, std::int64_t interval_seconds,
           const std::string& path) { write_trace(make_trace(counts, interval_seconds), path); },
        py::arg("counts"), py::arg("interval_seconds"), py::arg("path"));

    m.def(
        "optimize",
        [](const std::vector<std::int64_t>& counts, std::int64_t interval_seconds,
           double alpha_prime, int tau, double min_pool, double max_pool, int block) {
            auto sol = optimize(make_trace(counts, interval_seconds),
                                make_optimizer(alpha_prime, tau, min_pool, max_pool, block));
            py::dict out;
            out["objective"] = sol.objective;
            out["block_values"] = sol.schedule.block_values();
            out["rounded_block_values"] = sol.rounded_schedule.block_values();
            out["values"] = sol.rounded_schedule.values;
            return out;
        },
        py::arg("counts"), py::arg("interval_seconds") = 30, py::arg("alpha_prime") = 0.5,
        py::arg("tau") = 4, py::arg("min_pool") = 0.0, py::arg("max_pool") = 100.0,
        py::arg("block") = 10, "Solve the provisioning LP; returns the schedule and objective.");

    m.def(
        "simulate",
        [](const std::vector<std::int64_t>& counts, const std::vector<double>& pool_values,
           std::int64_t interval_seconds, int tau, int block, const std::string& miss_policy) {
            auto trace = make_trace(counts, interval_seconds);
            double max_pool = 0.0;
            for (double v : pool_values) max_pool = std::max(max_pool, v);
            auto schedule = PoolSchedule::from_blocks(
                pool_values, block, trace.horizon(), interval_seconds, 0.0, max_pool);
            SimulatorConfig cfg;
            cfg.tau_intervals = tau;
            cfg.miss_policy = miss_policy == "on_demand" ? MissPolicy::on_demand
                                                         : MissPolicy::fcfs;
            auto rep = simulate(trace, schedule, cfg);
            py::dict out;
            out["total_idle_intervals"] = rep.total_idle_intervals;
            out["total_wait_intervals"] = rep.total_wait_intervals;
            out["hit_count"] = rep.hit_count;
            out["miss_count"] = rep.miss_count;
            out["hit_rate"] = rep.hit_rate;
            out["per_request_wait"] = rep.per_request_wait;
            return out;
        },
        py::arg("counts"), py::arg("pool_values"), py::arg("interval_seconds") = 30,
        py::arg("tau") = 4, py::arg("block") = 1, py::arg("miss_policy") = "fcfs",
        "Replay a block-constant pool schedule against a demand trace.");

    m.def(
        "forecast",
        [](const std::vector<double>& series, int steps, int window, std::uint64_t seed,
           double alpha_prime_loss, int rank, double energy) {
            TrainingConfig training;
            training.seed = seed;
            training.horizon = steps;
            training.alpha_prime_loss = alpha_prime_loss;
            const auto policy = rank > 0 ? RankPolicy::fixed(rank) : RankPolicy::energy(energy);
            auto ssa = ssa_fit(series, window, policy);
            auto corrector = train_hybrid(series, ssa, training);
            return predict_hybrid(ssa, corrector, series, steps);
        },
        py::arg("series"), py::arg("steps") = 120, py::arg("window") = 150,
        py::arg("seed") = 0, py::arg("alpha_prime_loss") = 0.5, py::arg("rank") = 0,
        py::arg("energy") = 0.9,
        "SSA + error-corrector hybrid forecast of the next `steps` values.");

    m.def(
        "recommend",
        [](const std::vector<std::int64_t>& counts, std::int64_t interval_seconds,
           const std::string& mode, double alpha_prime, int tau, double min_pool,
           double max_pool, int block, int horizon, std::uint64_t seed) {
            PipelineConfig cfg;
            cfg.mode = parse_mode(mode);
            cfg.optimizer = make_optimizer(alpha_prime, tau, min_pool, max_pool, block);
            cfg.horizon_intervals = horizon;
            cfg.training.seed = seed;
            auto rec = recommend(make_trace(counts, interval_seconds), cfg);
            py::dict out;
            out["source_mode"] = mode_name(rec.source_mode);
            out["alpha_prime"] = rec.alpha_prime_used;
            out["degraded"] = rec.degraded;
            out["values"] = rec.schedule.values;
            out["block_values"] = rec.schedule.block_values();
            out["forecast"] = rec.forecast;
            return out;
        },
        py::arg("counts"), py::arg("interval_seconds") = 30, py::arg("mode") = "two_step",
        py::arg("alpha_prime") = 0.5, py::arg("tau") = 4, py::arg("min_pool") = 0.0,
        py::arg("max_pool") = 100.0, py::arg("block") = 10, py::arg("horizon") = 120,
        py::arg("seed") = 0,
        "End-to-end recommendation: integer pool schedule for the next horizon.");
}
