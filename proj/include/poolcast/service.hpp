#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "poolcast/autotuner.hpp"
#include "poolcast/pipeline.hpp"

namespace poolcast {

struct ServiceConfig {
    std::int64_t run_interval_seconds = 1800;  // 30 min cadence
    int recommendation_horizon_intervals = 120;  // 1 h of 30 s intervals
    std::int64_t default_pool_size = 0;          // double-failure fallback
    int max_consecutive_failures_before_default = 2;

    std::string trace_path;
    std::string recommendation_path;
    std::string metrics_path;
    std::string tuner_state_path;  // empty = tuner disabled

    double target_wait_seconds = -1.0;  // < 0 = tuner disabled
    PipelineConfig pipeline;

    int max_cycles = 0;  // 0 = run until interrupted

    // test seams
    std::function<void(int cycle)> failure_hook;       // throw to inject a failure
    std::function<std::int64_t()> clock;               // epoch seconds
    std::function<void(std::int64_t seconds)> sleeper; // between cycles

    void validate() const;
};

struct MetricsRecord {
    std::int64_t timestamp = 0;
    std::string status;  // succeeded | failed
    double avg_idle_time = 0.0;        // seconds per interval, backtest window
    double recommended_pool_size = 0.0;
    double demand_request_rate = 0.0;  // requests per interval
    std::int64_t pool_hit_count = 0;
    std::int64_t pool_miss_count = 0;
    double hit_rate = 1.0;
    double latency_ms = 0.0;
    std::string error;  // failed cycles only
};

/// One NDJSON line per record.
void append_metrics(const MetricsRecord& record, const std::string& path);
std::vector<MetricsRecord> read_metrics(const std::string& path);

/// The self-describing recommendation document; the filesystem stands in for
/// a document store. Pool sizes are integers; `schedule` lists one entry per
/// stability block.
struct RecommendationFile {
    int version = 1;
    std::int64_t generated_at = 0;
    std::int64_t interval_seconds = 30;
    int horizon_intervals = 120;
    double alpha_prime = 0.5;
    std::string source_mode;  // two_step | e2e | fallback_default
    std::vector<std::pair<std::int64_t, std::int64_t>> schedule;  // (block_start_interval, pool_size)
};

/// Atomic replace: write-temp-then-rename, so concurrent readers never see a
/// partial document.
void write_recommendation_file(const RecommendationFile& file, const std::string& path);
RecommendationFile read_recommendation_file(const std::string& path);

RecommendationFile to_recommendation_file(const Recommendation& rec);

/// The continuous recommendation loop. Per-cycle errors are caught and
/// logged; after the configured number of consecutive failures the default
/// schedule is published. Only configuration errors abort at startup.
class ServiceLoop {
public:
    explicit ServiceLoop(ServiceConfig config);

    /// Runs up to max_cycles (or forever when 0); returns cycles executed.
    int run();

    /// One cycle; returns true when it succeeded. Never throws for
    /// per-cycle errors.
    bool run_cycle(int cycle_index);

    int consecutive_failures() const { return consecutive_failures_; }

private:
    ServiceConfig config_;
    TunerState tuner_;
    bool tuner_loaded_ = false;
    int consecutive_failures_ = 0;

    std::int64_t now() const;
    void publish_default(std::int64_t timestamp);
};

}  // namespace poolcast
