#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "poolcast/optimizer.hpp"
#include "poolcast/schedule.hpp"
#include "poolcast/trace.hpp"

namespace testing_helpers {

// Exhaustive integer-schedule oracle: minimum weighted (idle, wait) objective
// over all block-constant schedules with values in {min_pool..max_pool},
// evaluated through the closed-form curve identities.
inline double enumerate_best_objective(const poolcast::DemandTrace& demand,
                                       const poolcast::OptimizerConfig& config) {
    const int T = static_cast<int>(demand.counts.size());
    const int S = config.stableness_intervals;
    const int B = (T + S - 1) / S;
    const auto lo = static_cast<int>(config.min_pool);
    const auto hi = static_cast<int>(config.max_pool);
    const int levels = hi - lo + 1;
    const auto [w_idle, w_wait] = config.objective_weights();

    std::vector<double> blocks(static_cast<std::size_t>(B), lo);
    double best = std::numeric_limits<double>::infinity();
    std::int64_t combos = 1;
    for (int b = 0; b < B; ++b) combos *= levels;
    for (std::int64_t code = 0; code < combos; ++code) {
        std::int64_t c = code;
        for (int b = 0; b < B; ++b) {
            blocks[static_cast<std::size_t>(b)] = lo + static_cast<int>(c % levels);
            c /= levels;
        }
        auto schedule = poolcast::PoolSchedule::from_blocks(
            blocks, S, static_cast<std::size_t>(T), demand.interval_seconds, config.min_pool,
            config.max_pool);
        if (!schedule.feasible(config.max_new_request)) continue;
        auto ev = poolcast::evaluate_schedule(demand, schedule, config);
        best = std::min(best, w_idle * ev.sum_delta_plus + w_wait * ev.sum_delta_minus);
    }
    return best;
}

inline poolcast::DemandTrace random_demand(std::mt19937_64& rng, int horizon, int max_count) {
    poolcast::DemandTrace d;
    d.interval_seconds = 30;
    std::uniform_int_distribution<std::int64_t> dist(0, max_count);
    d.counts.resize(static_cast<std::size_t>(horizon));
    for (auto& c : d.counts) c = dist(rng);
    return d;
}

}  // namespace testing_helpers
