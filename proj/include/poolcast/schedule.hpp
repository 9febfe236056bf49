#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace poolcast {

constexpr double kUnboundedRamp = std::numeric_limits<double>::infinity();

/// Block-constant target pool size N(t) over a horizon.
struct PoolSchedule {
    std::int64_t interval_seconds = 30;
    std::vector<double> values;  // one per interval, constant within blocks
    int block_length = 1;
    double min_pool = 0.0;
    double max_pool = 0.0;

    std::size_t horizon() const { return values.size(); }
    int block_count() const {
        return static_cast<int>((values.size() + static_cast<std::size_t>(block_length) - 1) /
                                static_cast<std::size_t>(block_length));
    }
    /// Value of block b (blocks are anchored at floor(t / block_length)).
    double block_value(int b) const {
        return values[static_cast<std::size_t>(b) * static_cast<std::size_t>(block_length)];
    }
    std::vector<double> block_values() const;

    static PoolSchedule from_blocks(const std::vector<double>& blocks, int block_length,
                                    std::size_t horizon, std::int64_t interval_seconds,
                                    double min_pool, double max_pool);
    static PoolSchedule constant(double value, std::size_t horizon,
                                 std::int64_t interval_seconds, double min_pool,
                                 double max_pool);

    /// Bounds, block-constancy, and the upward ramp limit at block boundaries.
    bool feasible(double max_new_request = kUnboundedRamp, double tol = 1e-9) const;
};

}  // namespace poolcast
