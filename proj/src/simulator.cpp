#include "poolcast/simulator.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <stdexcept>

namespace poolcast {

namespace {

struct Hydration {
    std::int64_t issued_at = 0;
    bool cancelled = false;
};

}  // namespace

SimulationReport simulate(const DemandTrace& trace, const PoolSchedule& schedule,
                          const SimulatorConfig& config) {
    if (trace.counts.size() != schedule.values.size())
        throw std::invalid_argument("simulate: schedule horizon != trace horizon");
    if (config.tau_intervals < 1)
        throw std::invalid_argument("simulate: tau_intervals must be >= 1");

    const auto T = static_cast<std::int64_t>(trace.counts.size());
    const std::int64_t tau = config.tau_intervals;
    std::vector<std::int64_t> target(static_cast<std::size_t>(T));
    for (std::int64_t t = 0; t < T; ++t)
        target[static_cast<std::size_t>(t)] = std::llround(schedule.values[static_cast<std::size_t>(t)]);

    SimulationReport rep;
    auto log = [&](std::int64_t t, const char* event, std::string detail = {}) {
        if (config.collect_events) rep.events.push_back({t, event, std::move(detail)});
    };

    std::int64_t ready = target.empty() ? 0 : target[0];  // N(0) ready clusters at t=0
    rep.clusters_created = ready;
    std::vector<Hydration> hydrations;  // all pool re-hydration requests
    std::deque<std::size_t> in_flight;  // indices into hydrations, FIFO by issue time
    struct Waiter {
        std::size_t request_index;
        std::int64_t arrived_at;
    };
    std::deque<Waiter> wait_queue;  // queued requests (fcfs)

    auto issue_hydration = [&](std::int64_t t) {
        hydrations.push_back({t, false});
        in_flight.push_back(hydrations.size() - 1);
        log(t, "hydrate_request");
    };

    auto serve_queue_or_pool = [&](std::int64_t t) {
        // a newly ready cluster goes to the queue head if anyone is waiting
        if (!wait_queue.empty()) {
            const Waiter w = wait_queue.front();
            wait_queue.pop_front();
            rep.per_request_wait[w.request_index] = static_cast<double>(t - w.arrived_at);
            ++rep.clusters_consumed;
        } else {
            ++ready;
        }
    };

    for (std::int64_t t = 0; t < T; ++t) {
        // 1. hydration completions
        while (!in_flight.empty()) {
            const auto& h = hydrations[in_flight.front()];
            if (h.issued_at + tau > t) break;
            in_flight.pop_front();
            ++rep.clusters_created;
            log(t, "cluster_ready");
            serve_queue_or_pool(t);
        }

        // 2. schedule change at block boundary
        if (t >= 1) {
            const std::int64_t diff =
                target[static_cast<std::size_t>(t)] - target[static_cast<std::size_t>(t - 1)];
            if (diff > 0) {
                for (std::int64_t k = 0; k < diff; ++k) issue_hydration(t);
            } else if (diff < 0) {
                std::int64_t shrink = -diff;
                const std::int64_t evict = std::min(shrink, ready);
                ready -= evict;
                rep.clusters_evicted += evict;
                shrink -= evict;
                for (std::int64_t k = 0; k < evict; ++k) log(t, "evict");
                while (shrink > 0 && !in_flight.empty()) {
                    hydrations[in_flight.back()].cancelled = true;
                    in_flight.pop_back();
                    ++rep.hydrations_cancelled;
                    --shrink;
                    log(t, "cancel");
                }
            }
        }

        // 3. arrivals at the interval start
        const std::int64_t arrivals = trace.counts[static_cast<std::size_t>(t)];
        for (std::int64_t k = 0; k < arrivals; ++k) {
            log(t, "arrival");
            if (ready > 0) {
                --ready;
                ++rep.clusters_consumed;
                ++rep.hit_count;
                rep.per_request_wait.push_back(0.0);
                log(t, "hit");
                issue_hydration(t);
            } else if (config.miss_policy == MissPolicy::fcfs) {
                ++rep.miss_count;
                // provisional wait: in queue until the horizon end unless served
                wait_queue.push_back({rep.per_request_wait.size(), t});
                rep.per_request_wait.push_back(static_cast<double>(T - t));
                log(t, "miss");
                issue_hydration(t);  // the arrival claims the next cluster to be ready
            } else {
                ++rep.miss_count;
                ++rep.on_demand_created;
                rep.per_request_wait.push_back(static_cast<double>(tau));
                log(t, "miss", "on_demand");
            }
        }

        // 4. accrue idle and wait over this interval
        rep.total_idle_intervals += static_cast<double>(ready);
        rep.total_wait_intervals += static_cast<double>(wait_queue.size());
    }

    rep.ready_at_end = ready;
    rep.in_flight_at_end = static_cast<std::int64_t>(in_flight.size());
    const std::int64_t total_requests = rep.hit_count + rep.miss_count;
    rep.hit_rate = total_requests == 0
                       ? 1.0
                       : static_cast<double>(rep.hit_count) / static_cast<double>(total_requests);

    // cumulative curves: D, A (issued and never cancelled, plus the initial
    // pool), A' (completions, a tau-shift of A)
    rep.curves.demand.resize(static_cast<std::size_t>(T));
    rep.curves.requests.resize(static_cast<std::size_t>(T));
    rep.curves.ready.resize(static_cast<std::size_t>(T));
    {
        std::vector<double> issued(static_cast<std::size_t>(T), 0.0);
        for (const auto& h : hydrations)
            if (!h.cancelled) issued[static_cast<std::size_t>(h.issued_at)] += 1.0;
        double d = 0.0, a = static_cast<double>(target.empty() ? 0 : target[0]);
        for (std::int64_t t = 0; t < T; ++t) {
            d += static_cast<double>(trace.counts[static_cast<std::size_t>(t)]);
            a += issued[static_cast<std::size_t>(t)];
            rep.curves.demand[static_cast<std::size_t>(t)] = d;
            rep.curves.requests[static_cast<std::size_t>(t)] = a;
            rep.curves.ready[static_cast<std::size_t>(t)] =
                (t < tau) ? static_cast<double>(target.empty() ? 0 : target[0])
                          : rep.curves.requests[static_cast<std::size_t>(t - tau)];
        }
    }
    return rep;
}

void write_event_log(const SimulationReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write event log: " + path);
    out << "interval,event,detail\n";
    for (const auto& e : report.events)
        out << e.interval << ',' << e.event << ',' << e.detail << '\n';
}

}  // namespace poolcast
