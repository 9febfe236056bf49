#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "poolcast/forecaster.hpp"
#include "poolcast/optimizer.hpp"
#include "poolcast/simulator.hpp"
#include "poolcast/trace.hpp"

namespace poolcast {

enum class PipelineMode { two_step, e2e };

PipelineMode parse_mode(const std::string& name);
std::string mode_name(PipelineMode mode);

/// Test seam: replaces the SSA+ forecaster. Receives the series observed so
/// far (smoothed demand for two_step, optimal-pool labels for e2e) and the
/// number of steps to predict. Still subject to the accuracy guardrail.
using ForecastHook = std::function<std::vector<double>(const std::vector<double>& series,
                                                       int steps)>;

struct PipelineConfig {
    PipelineMode mode = PipelineMode::two_step;
    OptimizerConfig optimizer;
    TrainingConfig training;
    SmoothingConfig smoothing;          // pre-training demand smoothing
    bool schedule_smoothing = false;    // SF = tau max filter on the output
    int history_window_intervals = 40320;  // 14 days of 30 s intervals
    int horizon_intervals = 120;           // 1 h recommendation window
    int ssa_window_length = 150;
    RankPolicy rank_policy = RankPolicy::energy(0.9);
    double guardrail_multiplier = 3.0;  // hybrid MAE vs baseline MAE ceiling
    double baseline_gamma = 1.0;
    ForecastHook forecaster_hook;  // empty = train the real SSA+ model
};

struct Recommendation {
    std::int64_t generated_at = 0;  // epoch seconds
    int horizon_intervals = 120;
    PoolSchedule schedule;  // integer, feasible
    PipelineMode source_mode = PipelineMode::two_step;
    std::vector<double> forecast;  // predicted demand (two_step only)
    double alpha_prime_used = 0.5;
    bool degraded = false;  // guardrail tripped, baseline fallback in effect
};

struct EvalPoint {
    double alpha_prime = 0.0;
    double idle_seconds = 0.0;
    double wait_seconds = 0.0;
    double avg_wait_seconds = 0.0;
    double hit_rate = 1.0;
    bool is_baseline = false;
};

struct EvaluationReport {
    std::vector<EvalPoint> points;  // sorted by alpha_prime
    EvalPoint baseline_static;
    double idle_reduction_vs_static = 0.0;
};

Recommendation recommend_two_step(const DemandTrace& history, const PipelineConfig& config);
Recommendation recommend_e2e(const DemandTrace& history, const PipelineConfig& config);
Recommendation recommend(const DemandTrace& history, const PipelineConfig& config);

/// For each alpha', runs the configured pipeline per horizon window across
/// `future` (models trained once on `history`) and simulates the stitched
/// schedule. The no-intelligence static pool is reported as the baseline.
EvaluationReport pareto_sweep(const DemandTrace& history, const DemandTrace& future,
                              const PipelineConfig& config, std::vector<double> alphas);

/// CSV `alpha_prime,idle_seconds,wait_seconds,avg_wait_seconds,hit_rate,is_baseline`.
void write_report_csv(const EvaluationReport& report, const std::string& path);

struct StaticComparison {
    EvalPoint static_point;   // smallest constant pool meeting the target
    EvalPoint dynamic_point;  // pipeline at the bisected alpha'
    double static_pool = 0.0;
    double alpha_prime = 0.0;
    double idle_reduction = 0.0;  // 1 - dynamic_idle / static_idle
};

/// Best static pool vs the dynamic pipeline at the largest alpha' whose
/// simulated hit rate still meets the target; throws when the target is
/// unreachable even at max_pool.
StaticComparison compare_static(const DemandTrace& history, const DemandTrace& future,
                                const PipelineConfig& config, double target_hit_rate);

/// Recommendation JSON persistence (used by the service loop).
void write_recommendation(const Recommendation& rec, const std::string& path);
Recommendation read_recommendation(const std::string& path);

}  // namespace poolcast
