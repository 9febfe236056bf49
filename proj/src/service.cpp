#include "poolcast/service.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "poolcast/simulator.hpp"

namespace poolcast {

namespace {

nlohmann::json metrics_json(const MetricsRecord& r) {
    nlohmann::json j;
    j["timestamp"] = r.timestamp;
    j["status"] = r.status;
    j["avg_idle_time"] = r.avg_idle_time;
    j["recommended_pool_size"] = r.recommended_pool_size;
    j["demand_request_rate"] = r.demand_request_rate;
    j["pool_hit_count"] = r.pool_hit_count;
    j["pool_miss_count"] = r.pool_miss_count;
    j["hit_rate"] = r.hit_rate;
    j["latency_ms"] = r.latency_ms;
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

void atomic_write(const std::string& path, const std::string& body) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw std::runtime_error("atomic_write: cannot open " + tmp);
        os << body;
        os.flush();
        if (!os) throw std::runtime_error("atomic_write: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

void ServiceConfig::validate() const {
    if (run_interval_seconds < 1)
        throw std::invalid_argument("service: run interval must be positive");
    if (recommendation_horizon_intervals < 1)
        throw std::invalid_argument("service: horizon must be positive");
    if (default_pool_size < 0)
        throw std::invalid_argument("service: default pool size must be non-negative");
    if (max_consecutive_failures_before_default < 1)
        throw std::invalid_argument("service: failure threshold must be positive");
    if (trace_path.empty() || recommendation_path.empty() || metrics_path.empty())
        throw std::invalid_argument("service: trace, recommendation, and metrics paths required");
    if (max_cycles < 0) throw std::invalid_argument("service: max_cycles must be >= 0");
}

void append_metrics(const MetricsRecord& record, const std::string& path) {
    std::ofstream os(path, std::ios::app);
    if (!os) throw std::runtime_error("append_metrics: cannot open " + path);
    os << metrics_json(record).dump() << '\n';
    if (!os) throw std::runtime_error("append_metrics: write failed for " + path);
}

std::vector<MetricsRecord> read_metrics(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_metrics: cannot open " + path);
    std::vector<MetricsRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        MetricsRecord r;
        r.timestamp = j.at("timestamp").get<std::int64_t>();
        r.status = j.at("status").get<std::string>();
        r.avg_idle_time = j.at("avg_idle_time").get<double>();
        r.recommended_pool_size = j.at("recommended_pool_size").get<double>();
        r.demand_request_rate = j.at("demand_request_rate").get<double>();
        r.pool_hit_count = j.at("pool_hit_count").get<std::int64_t>();
        r.pool_miss_count = j.at("pool_miss_count").get<std::int64_t>();
        r.hit_rate = j.at("hit_rate").get<double>();
        r.latency_ms = j.at("latency_ms").get<double>();
        if (j.contains("error")) r.error = j.at("error").get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

void write_recommendation_file(const RecommendationFile& file, const std::string& path) {
    nlohmann::json j;
    j["version"] = file.version;
    j["generated_at"] = file.generated_at;
    j["interval_seconds"] = file.interval_seconds;
    j["horizon_intervals"] = file.horizon_intervals;
    j["alpha_prime"] = file.alpha_prime;
    j["source_mode"] = file.source_mode;
    j["schedule"] = nlohmann::json::array();
    for (const auto& [start, size] : file.schedule)
        j["schedule"].push_back({{"block_start_interval", start}, {"pool_size", size}});
    atomic_write(path, j.dump(2) + "\n");
}

RecommendationFile read_recommendation_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_recommendation_file: cannot open " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_recommendation_file: bad JSON in " + path + ": " +
                                 e.what());
    }
    RecommendationFile f;
    f.version = j.at("version").get<int>();
    if (f.version != 1)
        throw std::runtime_error("read_recommendation_file: unsupported version in " + path);
    f.generated_at = j.at("generated_at").get<std::int64_t>();
    f.interval_seconds = j.at("interval_seconds").get<std::int64_t>();
    f.horizon_intervals = j.at("horizon_intervals").get<int>();
    f.alpha_prime = j.at("alpha_prime").get<double>();
    f.source_mode = j.at("source_mode").get<std::string>();
    for (const auto& e : j.at("schedule"))
        f.schedule.emplace_back(e.at("block_start_interval").get<std::int64_t>(),
                                e.at("pool_size").get<std::int64_t>());
    return f;
}

RecommendationFile to_recommendation_file(const Recommendation& rec) {
    RecommendationFile f;
    f.generated_at = rec.generated_at;
    f.interval_seconds = rec.schedule.interval_seconds;
    f.horizon_intervals = rec.horizon_intervals;
    f.alpha_prime = rec.alpha_prime_used;
    f.source_mode = mode_name(rec.source_mode);
    for (int b = 0; b < rec.schedule.block_count(); ++b)
        f.schedule.emplace_back(static_cast<std::int64_t>(b) * rec.schedule.block_length,
                                static_cast<std::int64_t>(std::llround(
                                    rec.schedule.block_value(b))));
    return f;
}

ServiceLoop::ServiceLoop(ServiceConfig config) : config_(std::move(config)) {
    config_.validate();
    tuner_.target_wait = std::max(0.0, config_.target_wait_seconds);
    tuner_.current_alpha = config_.pipeline.optimizer.effective_alpha_prime();
}

std::int64_t ServiceLoop::now() const {
    if (config_.clock) return config_.clock();
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

void ServiceLoop::publish_default(std::int64_t timestamp) {
    RecommendationFile f;
    f.generated_at = timestamp;
    f.interval_seconds = 30;
    f.horizon_intervals = config_.recommendation_horizon_intervals;
    f.alpha_prime = config_.pipeline.optimizer.effective_alpha_prime();
    f.source_mode = "fallback_default";
    const int s = config_.pipeline.optimizer.stableness_intervals;
    for (int start = 0; start < config_.recommendation_horizon_intervals; start += s)
        f.schedule.emplace_back(start, config_.default_pool_size);
    write_recommendation_file(f, config_.recommendation_path);
}

bool ServiceLoop::run_cycle(int cycle_index) {
    const std::int64_t started = now();
    const auto wall_start = std::chrono::steady_clock::now();
    MetricsRecord metrics;
    metrics.timestamp = started;

    const bool tuning = !config_.tuner_state_path.empty() && config_.target_wait_seconds >= 0.0;
    try {
        if (config_.failure_hook) config_.failure_hook(cycle_index);

        auto trace = read_trace(config_.trace_path);
        if (config_.run_interval_seconds >=
            static_cast<std::int64_t>(config_.recommendation_horizon_intervals) *
                trace.interval_seconds)
            throw std::runtime_error(
                "service: run interval must be shorter than the recommendation horizon");

        PipelineConfig pipeline = config_.pipeline;
        pipeline.horizon_intervals = config_.recommendation_horizon_intervals;
        if (tuning) {
            if (!tuner_loaded_) {
                if (std::filesystem::exists(config_.tuner_state_path))
                    tuner_ = load_tuner_state(config_.tuner_state_path);
                tuner_.target_wait = config_.target_wait_seconds;
                tuner_loaded_ = true;
            }
            pipeline.optimizer.alpha_prime = tuner_.current_alpha;
            pipeline.optimizer.legacy_alpha.reset();
            pipeline.optimizer.legacy_beta.reset();
        }

        auto rec = recommend(trace, pipeline);
        rec.generated_at = started;
        write_recommendation_file(to_recommendation_file(rec), config_.recommendation_path);

        // backtest the fresh schedule against the most recent horizon of
        // observed demand: the source of the monitoring metrics and the
        // tuner's measured wait
        const std::size_t h = static_cast<std::size_t>(config_.recommendation_horizon_intervals);
        if (trace.counts.size() >= h) {
            DemandTrace window = trace;
            window.counts.assign(trace.counts.end() - static_cast<std::ptrdiff_t>(h),
                                 trace.counts.end());
            SimulatorConfig sim;
            sim.tau_intervals = pipeline.optimizer.tau_intervals;
            auto rep = simulate(window, rec.schedule, sim);
            metrics.avg_idle_time = rep.total_idle_intervals *
                                    static_cast<double>(trace.interval_seconds) /
                                    static_cast<double>(h);
            metrics.pool_hit_count = rep.hit_count;
            metrics.pool_miss_count = rep.miss_count;
            metrics.hit_rate = rep.hit_rate;
            metrics.demand_request_rate =
                static_cast<double>(window.total()) / static_cast<double>(h);
            double wait_sum = 0.0;
            for (double w : rep.per_request_wait) wait_sum += w;
            const double avg_wait_seconds =
                rep.per_request_wait.empty()
                    ? 0.0
                    : wait_sum * static_cast<double>(trace.interval_seconds) /
                          static_cast<double>(rep.per_request_wait.size());
            if (tuning) {
                observe(tuner_, pipeline.optimizer.alpha_prime, avg_wait_seconds);
                tuner_.current_alpha = next_alpha(tuner_);
                save_tuner_state(tuner_, config_.tuner_state_path);
            }
        }
        double mean_pool = 0.0;
        for (double v : rec.schedule.values) mean_pool += v;
        metrics.recommended_pool_size =
            mean_pool / static_cast<double>(rec.schedule.values.size());

        metrics.status = "succeeded";
        consecutive_failures_ = 0;
    } catch (const std::exception& e) {
        metrics.status = "failed";
        metrics.error = e.what();
        ++consecutive_failures_;
        if (consecutive_failures_ >= config_.max_consecutive_failures_before_default)
            publish_default(started);
    }

    metrics.latency_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - wall_start)
                             .count();
    try {
        append_metrics(metrics, config_.metrics_path);
    } catch (const std::exception&) {
        // metrics loss never kills the loop
    }
    return metrics.status == "succeeded";
}

int ServiceLoop::run() {
    int cycle = 0;
    while (config_.max_cycles == 0 || cycle < config_.max_cycles) {
        run_cycle(cycle);
        ++cycle;
        if (config_.max_cycles != 0 && cycle >= config_.max_cycles) break;
        if (config_.sleeper)
            config_.sleeper(config_.run_interval_seconds);
        else
            std::this_thread::sleep_for(std::chrono::seconds(config_.run_interval_seconds));
    }
    return cycle;
}

}  // namespace poolcast
