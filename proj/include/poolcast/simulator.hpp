#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "poolcast/optimizer.hpp"
#include "poolcast/schedule.hpp"
#include "poolcast/trace.hpp"

namespace poolcast {

enum class MissPolicy { fcfs, on_demand };
enum class ShrinkPolicy { evict_idle_then_cancel };

struct SimulatorConfig {
    int tau_intervals = 4;
    MissPolicy miss_policy = MissPolicy::fcfs;
    ShrinkPolicy shrink_policy = ShrinkPolicy::evict_idle_then_cancel;
    bool collect_events = false;
};

struct SimEvent {
    std::int64_t interval = 0;
    std::string event;   // arrival|hit|miss|hydrate_request|cluster_ready|evict|cancel
    std::string detail;
};

struct SimulationReport {
    double total_idle_intervals = 0.0;   // cluster-intervals
    double total_wait_intervals = 0.0;   // request-intervals
    std::vector<double> per_request_wait;
    std::int64_t hit_count = 0;
    std::int64_t miss_count = 0;
    double hit_rate = 1.0;  // 1.0 with zero requests
    CumulativeCurves curves;

    // conservation accounting
    std::int64_t clusters_created = 0;  // initial pool + completed hydrations
    std::int64_t clusters_consumed = 0;
    std::int64_t clusters_evicted = 0;
    std::int64_t hydrations_cancelled = 0;
    std::int64_t ready_at_end = 0;
    std::int64_t in_flight_at_end = 0;
    std::int64_t on_demand_created = 0;

    std::vector<SimEvent> events;
};

/// Replays an integer pool-size schedule against a demand trace. Arrivals
/// happen at interval starts; completions within an interval precede them.
SimulationReport simulate(const DemandTrace& trace, const PoolSchedule& schedule,
                          const SimulatorConfig& config);

/// CSV `interval,event,detail`.
void write_event_log(const SimulationReport& report, const std::string& path);

}  // namespace poolcast
