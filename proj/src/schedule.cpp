#include "poolcast/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace poolcast {

std::vector<double> PoolSchedule::block_values() const {
    std::vector<double> blocks;
    blocks.reserve(static_cast<std::size_t>(block_count()));
    for (int b = 0; b < block_count(); ++b) blocks.push_back(block_value(b));
    return blocks;
}

PoolSchedule PoolSchedule::from_blocks(const std::vector<double>& blocks, int block_length,
                                       std::size_t horizon, std::int64_t interval_seconds,
                                       double min_pool, double max_pool) {
    if (block_length < 1) throw std::invalid_argument("block_length must be >= 1");
    PoolSchedule s;
    s.interval_seconds = interval_seconds;
    s.block_length = block_length;
    s.min_pool = min_pool;
    s.max_pool = max_pool;
    s.values.resize(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        const auto b = t / static_cast<std::size_t>(block_length);
        if (b >= blocks.size()) throw std::invalid_argument("not enough block values");
        s.values[t] = blocks[b];
    }
    return s;
}

PoolSchedule PoolSchedule::constant(double value, std::size_t horizon,
                                    std::int64_t interval_seconds, double min_pool,
                                    double max_pool) {
    PoolSchedule s;
    s.interval_seconds = interval_seconds;
    s.block_length = 1;
    s.min_pool = min_pool;
    s.max_pool = max_pool;
    s.values.assign(horizon, value);
    return s;
}

bool PoolSchedule::feasible(double max_new_request, double tol) const {
    for (std::size_t t = 0; t < values.size(); ++t) {
        if (values[t] < min_pool - tol || values[t] > max_pool + tol) return false;
        const auto anchor =
            (t / static_cast<std::size_t>(block_length)) * static_cast<std::size_t>(block_length);
        if (std::abs(values[t] - values[anchor]) > tol) return false;
        if (t >= 1 && std::isfinite(max_new_request) &&
            values[t] - values[t - 1] > max_new_request + tol)
            return false;
    }
    return true;
}

}  // namespace poolcast
