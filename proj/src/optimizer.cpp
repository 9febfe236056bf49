#include "poolcast/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace poolcast {

double OptimizerConfig::effective_alpha_prime() const {
    if (legacy_alpha && legacy_beta) {
        const double a = *legacy_alpha, b = *legacy_beta;
        if (a <= 0.0 || b <= 0.0)
            throw std::invalid_argument("legacy weights must be positive");
        return a / (a + b);
    }
    return alpha_prime;
}

std::pair<double, double> OptimizerConfig::objective_weights() const {
    if (legacy_alpha && legacy_beta) return {*legacy_alpha, *legacy_beta};
    return {alpha_prime, 1.0 - alpha_prime};
}

void OptimizerConfig::validate() const {
    if (alpha_prime < 0.0 || alpha_prime > 1.0)
        throw std::invalid_argument("alpha_prime must be in [0,1]");
    if (tau_intervals < 1) throw std::invalid_argument("tau_intervals must be >= 1");
    if (min_pool < 0.0 || min_pool > max_pool)
        throw std::invalid_argument("require 0 <= min_pool <= max_pool");
    if (stableness_intervals < 1)
        throw std::invalid_argument("stableness_intervals must be >= 1");
    if (max_new_request <= 0.0)
        throw std::invalid_argument("max_new_request must be positive");
}

int LpProblem::family_count(const std::string& family) const {
    int n = 0;
    for (const auto& c : program.constraints)
        if (c.family == family) ++n;
    return n;
}

LpProblem build_lp(const DemandTrace& demand, const OptimizerConfig& config) {
    std::vector<double> increments(demand.counts.begin(), demand.counts.end());
    return build_lp(increments, demand.interval_seconds, config);
}

LpProblem build_lp(const std::vector<double>& demand_increments,
                   std::int64_t interval_seconds, const OptimizerConfig& config) {
    config.validate();
    const int T = static_cast<int>(demand_increments.size());
    if (T < 1) throw std::invalid_argument("build_lp: zero-length demand");
    const int S = config.stableness_intervals;
    const int B = (T + S - 1) / S;
    const int tau = config.tau_intervals;

    LpProblem p;
    p.horizon = T;
    p.block_count = B;
    p.block_length = S;
    p.interval_seconds = interval_seconds;
    p.config = config;
    p.cumulative_demand.resize(static_cast<std::size_t>(T));
    double acc = 0.0;
    for (int t = 0; t < T; ++t) {
        acc += demand_increments[static_cast<std::size_t>(t)];
        p.cumulative_demand[static_cast<std::size_t>(t)] = acc;
    }

    auto& prog = p.program;
    prog.num_vars = B + 2 * T;
    prog.objective.assign(static_cast<std::size_t>(prog.num_vars), 0.0);
    const auto [w_idle, w_wait] = config.objective_weights();
    for (int t = 0; t < T; ++t) {
        prog.objective[static_cast<std::size_t>(p.dp_var(t))] = w_idle;
        prog.objective[static_cast<std::size_t>(p.dm_var(t))] = w_wait;
    }
    prog.var_names.resize(static_cast<std::size_t>(prog.num_vars));
    for (int b = 0; b < B; ++b) prog.var_names[static_cast<std::size_t>(b)] = "N" + std::to_string(b);
    for (int t = 0; t < T; ++t) {
        prog.var_names[static_cast<std::size_t>(p.dp_var(t))] = "dp" + std::to_string(t);
        prog.var_names[static_cast<std::size_t>(p.dm_var(t))] = "dm" + std::to_string(t);
    }

    const auto& D = p.cumulative_demand;
    // shift: dp(t) - dm(t) - N(block(t - tau)) = D(t - tau) - D(t), with the
    // pre-completion convention A'(t) = N(0) for t < tau.
    for (int t = 0; t < T; ++t) {
        lp::Constraint c;
        c.family = "shift";
        c.rel = lp::Relation::eq;
        c.terms.emplace_back(p.dp_var(t), 1.0);
        c.terms.emplace_back(p.dm_var(t), -1.0);
        if (t < tau) {
            c.terms.emplace_back(p.n_var(0), -1.0);
            c.rhs = -D[static_cast<std::size_t>(t)];
        } else {
            c.terms.emplace_back(p.n_var((t - tau) / S), -1.0);
            c.rhs = D[static_cast<std::size_t>(t - tau)] - D[static_cast<std::size_t>(t)];
        }
        prog.constraints.push_back(std::move(c));
    }
    // delta lower bounds
    for (int t = 0; t < T; ++t) {
        for (int v : {p.dp_var(t), p.dm_var(t)}) {
            lp::Constraint c;
            c.family = "delta_nonneg";
            c.rel = lp::Relation::ge;
            c.rhs = 0.0;
            c.terms.emplace_back(v, 1.0);
            prog.constraints.push_back(std::move(c));
        }
    }
    // ramp at block boundaries (only when bounded)
    if (std::isfinite(config.max_new_request)) {
        for (int b = 1; b < B; ++b) {
            lp::Constraint c;
            c.family = "ramp";
            c.rel = lp::Relation::le;
            c.rhs = config.max_new_request;
            c.terms.emplace_back(p.n_var(b), 1.0);
            c.terms.emplace_back(p.n_var(b - 1), -1.0);
            prog.constraints.push_back(std::move(c));
        }
    }
    // box bounds on the pool size
    for (int b = 0; b < B; ++b) {
        lp::Constraint lo;
        lo.family = "box";
        lo.rel = lp::Relation::ge;
        lo.rhs = config.min_pool;
        lo.terms.emplace_back(p.n_var(b), 1.0);
        prog.constraints.push_back(std::move(lo));
        lp::Constraint hi;
        hi.family = "box";
        hi.rel = lp::Relation::le;
        hi.rhs = config.max_pool;
        hi.terms.emplace_back(p.n_var(b), 1.0);
        prog.constraints.push_back(std::move(hi));
    }
    return p;
}

ScheduleEvaluation evaluate_schedule(const std::vector<double>& demand_increments,
                                     const PoolSchedule& schedule, int tau_intervals) {
    const auto T = demand_increments.size();
    if (schedule.values.size() != T)
        throw std::invalid_argument("evaluate_schedule: horizon mismatch");
    if (tau_intervals < 1)
        throw std::invalid_argument("evaluate_schedule: tau must be >= 1");
    ScheduleEvaluation ev;
    ev.curves.demand.resize(T);
    ev.curves.requests.resize(T);
    ev.curves.ready.resize(T);
    ev.delta_plus.resize(T);
    ev.delta_minus.resize(T);
    double acc = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        acc += demand_increments[t];
        ev.curves.demand[t] = acc;
        ev.curves.requests[t] = acc + schedule.values[t];
    }
    const auto tau = static_cast<std::size_t>(tau_intervals);
    for (std::size_t t = 0; t < T; ++t) {
        const double ready = (t < tau) ? schedule.values[0] : ev.curves.requests[t - tau];
        ev.curves.ready[t] = ready;
        const double gap = ready - ev.curves.demand[t];
        ev.delta_plus[t] = std::max(0.0, gap);
        ev.delta_minus[t] = std::max(0.0, -gap);
        ev.sum_delta_plus += ev.delta_plus[t];
        ev.sum_delta_minus += ev.delta_minus[t];
    }
    return ev;
}

ScheduleEvaluation evaluate_schedule(const DemandTrace& demand, const PoolSchedule& schedule,
                                     const OptimizerConfig& config) {
    std::vector<double> increments(demand.counts.begin(), demand.counts.end());
    return evaluate_schedule(increments, schedule, config.tau_intervals);
}

PoolSchedule round_schedule(const PoolSchedule& continuous, const OptimizerConfig& config) {
    PoolSchedule out = continuous;
    const int B = continuous.block_count();
    std::vector<double> blocks(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        double v = std::ceil(continuous.block_value(b) - 1e-9);
        v = std::clamp(v, std::ceil(config.min_pool - 1e-9), std::floor(config.max_pool + 1e-9));
        blocks[static_cast<std::size_t>(b)] = v;
    }
    if (std::isfinite(config.max_new_request)) {
        const double step = std::floor(config.max_new_request + 1e-9);
        for (int b = 1; b < B; ++b)
            if (blocks[static_cast<std::size_t>(b)] > blocks[static_cast<std::size_t>(b - 1)] + step)
                blocks[static_cast<std::size_t>(b)] = blocks[static_cast<std::size_t>(b - 1)] + step;
    }
    return PoolSchedule::from_blocks(blocks, continuous.block_length, continuous.horizon(),
                                     continuous.interval_seconds, config.min_pool,
                                     config.max_pool);
}

PoolSchedule smooth_schedule(const PoolSchedule& schedule, int tau_intervals) {
    if (tau_intervals < 1) throw std::invalid_argument("smooth_schedule: tau must be >= 1");
    SmoothingConfig cfg{tau_intervals};
    auto filtered = max_filter(schedule.values, cfg);
    // re-impose block structure with the per-block maximum
    PoolSchedule out = schedule;
    const int S = schedule.block_length;
    const auto T = schedule.values.size();
    for (std::size_t b0 = 0; b0 < T; b0 += static_cast<std::size_t>(S)) {
        const std::size_t b1 = std::min(T, b0 + static_cast<std::size_t>(S));
        double m = filtered[b0];
        for (std::size_t t = b0 + 1; t < b1; ++t) m = std::max(m, filtered[t]);
        for (std::size_t t = b0; t < b1; ++t) out.values[t] = m;
    }
    return out;
}

LpSolution solve(const LpProblem& problem) {
    // tie-break: among optima prefer the lowest total pool size
    std::vector<double> tie(static_cast<std::size_t>(problem.program.num_vars), 0.0);
    for (int b = 0; b < problem.block_count; ++b) tie[static_cast<std::size_t>(b)] = 1.0;
    auto raw = lp::solve_lexicographic(problem.program, tie);
    if (raw.status == lp::SolveStatus::infeasible)
        throw std::runtime_error("pool LP reported infeasible (bug signal): " + raw.message);
    if (raw.status == lp::SolveStatus::unbounded)
        throw std::runtime_error("pool LP reported unbounded (bug signal): " + raw.message);

    std::vector<double> blocks(static_cast<std::size_t>(problem.block_count));
    for (int b = 0; b < problem.block_count; ++b)
        blocks[static_cast<std::size_t>(b)] = raw.x[static_cast<std::size_t>(b)];

    LpSolution sol;
    sol.schedule = PoolSchedule::from_blocks(blocks, problem.block_length,
                                             static_cast<std::size_t>(problem.horizon),
                                             problem.interval_seconds, problem.config.min_pool,
                                             problem.config.max_pool);
    // recompute deltas in closed form from the pool trajectory; this keeps the
    // complementarity min(dp, dm) = 0 exact even at boundary weights
    std::vector<double> increments(static_cast<std::size_t>(problem.horizon));
    double prev = 0.0;
    for (int t = 0; t < problem.horizon; ++t) {
        increments[static_cast<std::size_t>(t)] = problem.cumulative_demand[static_cast<std::size_t>(t)] - prev;
        prev = problem.cumulative_demand[static_cast<std::size_t>(t)];
    }
    auto ev = evaluate_schedule(increments, sol.schedule, problem.config.tau_intervals);
    sol.delta_plus = std::move(ev.delta_plus);
    sol.delta_minus = std::move(ev.delta_minus);
    sol.curves = std::move(ev.curves);
    const auto [w_idle, w_wait] = problem.config.objective_weights();
    sol.objective = w_idle * ev.sum_delta_plus + w_wait * ev.sum_delta_minus;
    sol.rounded_schedule = round_schedule(sol.schedule, problem.config);
    return sol;
}

LpSolution optimize(const DemandTrace& demand, const OptimizerConfig& config) {
    return solve(build_lp(demand, config));
}

std::string dump_lp(const LpProblem& problem) {
    std::ostringstream out;
    const auto& prog = problem.program;
    out << "minimize";
    for (int j = 0; j < prog.num_vars; ++j) {
        const double c = prog.objective[static_cast<std::size_t>(j)];
        if (c != 0.0) out << " + " << c << ' ' << prog.var_names[static_cast<std::size_t>(j)];
    }
    out << "\nsubject to\n";
    for (const auto& c : prog.constraints) {
        out << "  [" << c.family << "]";
        for (const auto& [j, v] : c.terms)
            out << ' ' << (v >= 0 ? "+" : "-") << ' ' << std::abs(v) << ' '
                << prog.var_names[static_cast<std::size_t>(j)];
        switch (c.rel) {
            case lp::Relation::le: out << " <= "; break;
            case lp::Relation::ge: out << " >= "; break;
            case lp::Relation::eq: out << " = "; break;
        }
        out << c.rhs << '\n';
    }
    return out.str();
}

}  // namespace poolcast
