#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace poolcast {

/// Per-interval cluster request counts at a fixed interval width.
/// Cumulative demand D(t) is the inclusive prefix sum of `counts`.
struct DemandTrace {
    std::int64_t interval_seconds = 30;
    std::int64_t start_time = 0;  // UTC epoch seconds of first interval
    std::vector<std::int64_t> counts;

    std::size_t horizon() const { return counts.size(); }
    std::vector<std::int64_t> cumulative() const;
    std::int64_t total() const;
};

/// Max-filter smoothing: window half-width is round-half-up(SF / 2),
/// truncated at both series ends.
struct SmoothingConfig {
    int smoothing_factor = 0;  // SF, in intervals; 0 = identity
};

enum class TracePattern { constant, diurnal, hourly_spikes, sporadic_spikes };

struct SyntheticTraceSpec {
    TracePattern pattern = TracePattern::constant;
    double base_rate = 1.0;   // requests/interval
    double peak_rate = 1.0;
    int period_intervals = 120;
    std::uint64_t noise_seed = 0;
    int horizon_intervals = 1;
    double spike_period_jitter = 0.0;  // fraction of period
    std::int64_t interval_seconds = 30;
    std::int64_t start_time = 0;
};

TracePattern parse_pattern(const std::string& name);
std::string pattern_name(TracePattern p);

/// Bucket raw event timestamps into fixed intervals over [start, end).
/// Events outside the range are dropped.
DemandTrace aggregate_events(const std::vector<double>& event_times,
                             std::int64_t interval_seconds,
                             std::int64_t start, std::int64_t end);

/// out[t] = max of `series` over [t - h, t + h] with h = round-half-up(SF/2),
/// windows clamped at both ends. SF = 0 is the identity.
std::vector<double> max_filter(const std::vector<double>& series,
                               const SmoothingConfig& config);

/// Max-filter applied to a trace's counts (integer-preserving).
DemandTrace smooth_trace(const DemandTrace& trace, const SmoothingConfig& config);

/// Noiseless expected rate of the pattern at interval t.
double pattern_mean(const SyntheticTraceSpec& spec, int t);

/// Poisson counts around the pattern mean; pure function of the spec.
DemandTrace generate_trace(const SyntheticTraceSpec& spec);

/// CSV with header `timestamp,count`; interval width is inferred from
/// consecutive rows and must be uniform. Parse errors name the line.
DemandTrace read_trace(const std::string& path);
void write_trace(const DemandTrace& trace, const std::string& path);

}  // namespace poolcast
