#pragma once

#include <optional>
#include <string>
#include <vector>

#include "poolcast/lp.hpp"
#include "poolcast/schedule.hpp"
#include "poolcast/trace.hpp"

namespace poolcast {

/// Cumulative demand D(t), re-hydration requests A(t), and ready clusters
/// A'(t) = A(t - tau), with A'(t) = N(0) before the first completions.
struct CumulativeCurves {
    std::vector<double> demand;    // D
    std::vector<double> requests;  // A
    std::vector<double> ready;     // A'
};

struct OptimizerConfig {
    double alpha_prime = 0.5;      // idle-vs-wait weight
    int tau_intervals = 4;         // cluster initialization latency, intervals
    double min_pool = 0.0;
    double max_pool = 100.0;
    int stableness_intervals = 10;  // block length
    double max_new_request = kUnboundedRamp;
    std::optional<double> legacy_alpha;  // Eq. (8)-style raw weights
    std::optional<double> legacy_beta;

    /// alpha' normalized from legacy weights when those are set.
    double effective_alpha_prime() const;
    /// Objective coefficients (w_idle, w_wait): raw legacy weights when set,
    /// otherwise (alpha', 1 - alpha').
    std::pair<double, double> objective_weights() const;
    void validate() const;
};

/// Standard-form LP: block pool-size variables followed by per-interval
/// surplus/deficit variables. Constraint families: shift, delta_nonneg,
/// ramp, box.
struct LpProblem {
    lp::Program program;
    int horizon = 0;
    int block_count = 0;
    int block_length = 1;
    std::int64_t interval_seconds = 30;
    OptimizerConfig config;
    std::vector<double> cumulative_demand;

    int n_var(int block) const { return block; }
    int dp_var(int t) const { return block_count + t; }
    int dm_var(int t) const { return block_count + horizon + t; }
    int family_count(const std::string& family) const;
};

struct ScheduleEvaluation {
    double sum_delta_plus = 0.0;
    double sum_delta_minus = 0.0;
    std::vector<double> delta_plus;
    std::vector<double> delta_minus;
    CumulativeCurves curves;
};

struct LpSolution {
    PoolSchedule schedule;          // continuous optimum
    PoolSchedule rounded_schedule;  // integer, ramp-repaired
    double objective = 0.0;
    std::vector<double> delta_plus;
    std::vector<double> delta_minus;
    CumulativeCurves curves;
};

LpProblem build_lp(const DemandTrace& demand, const OptimizerConfig& config);
LpProblem build_lp(const std::vector<double>& demand_increments,
                   std::int64_t interval_seconds, const OptimizerConfig& config);

/// Exact solve with deterministic tie-break toward the lowest pool sizes.
LpSolution solve(const LpProblem& problem);

LpSolution optimize(const DemandTrace& demand, const OptimizerConfig& config);

/// Closed-form curve evaluation for a fixed schedule (no LP involved).
ScheduleEvaluation evaluate_schedule(const DemandTrace& demand, const PoolSchedule& schedule,
                                     const OptimizerConfig& config);
ScheduleEvaluation evaluate_schedule(const std::vector<double>& demand_increments,
                                     const PoolSchedule& schedule, int tau_intervals);

/// Per-block ceiling, clamped to bounds, forward-repaired for the ramp limit.
PoolSchedule round_schedule(const PoolSchedule& continuous, const OptimizerConfig& config);

/// Max filter with SF = tau over the schedule values, then per-block maximum.
PoolSchedule smooth_schedule(const PoolSchedule& schedule, int tau_intervals);

/// Plain-text dump (objective row, then constraint rows) for cross-checking.
std::string dump_lp(const LpProblem& problem);

}  // namespace poolcast
