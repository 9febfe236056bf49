#include "poolcast/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace poolcast {

std::vector<std::int64_t> DemandTrace::cumulative() const {
    std::vector<std::int64_t> cum(counts.size());
    std::int64_t acc = 0;
    for (std::size_t t = 0; t < counts.size(); ++t) {
        acc += counts[t];
        cum[t] = acc;
    }
    return cum;
}

std::int64_t DemandTrace::total() const {
    std::int64_t acc = 0;
    for (auto c : counts) acc += c;
    return acc;
}

TracePattern parse_pattern(const std::string& name) {
    if (name == "constant") return TracePattern::constant;
    if (name == "diurnal") return TracePattern::diurnal;
    if (name == "hourly_spikes") return TracePattern::hourly_spikes;
    if (name == "sporadic_spikes") return TracePattern::sporadic_spikes;
    throw std::invalid_argument("unknown trace pattern: " + name);
}

std::string pattern_name(TracePattern p) {
    switch (p) {
        case TracePattern::constant: return "constant";
        case TracePattern::diurnal: return "diurnal";
        case TracePattern::hourly_spikes: return "hourly_spikes";
        case TracePattern::sporadic_spikes: return "sporadic_spikes";
    }
    return "unknown";
}

DemandTrace aggregate_events(const std::vector<double>& event_times,
                             std::int64_t interval_seconds,
                             std::int64_t start, std::int64_t end) {
    if (interval_seconds <= 0) throw std::invalid_argument("interval_seconds must be positive");
    if (start >= end) throw std::invalid_argument("empty interval bound: start >= end");
    const std::int64_t span = end - start;
    const std::size_t buckets =
        static_cast<std::size_t>((span + interval_seconds - 1) / interval_seconds);
    DemandTrace trace;
    trace.interval_seconds = interval_seconds;
    trace.start_time = start;
    trace.counts.assign(buckets, 0);
    for (double t : event_times) {
        if (t < static_cast<double>(start) || t >= static_cast<double>(end)) continue;
        auto k = static_cast<std::size_t>((t - static_cast<double>(start)) /
                                          static_cast<double>(interval_seconds));
        if (k >= buckets) continue;
        ++trace.counts[k];
    }
    return trace;
}

namespace {

int filter_halfwidth(int sf) {
    // round-half-up(SF / 2)
    return (sf + 1) / 2;
}

}  // namespace

std::vector<double> max_filter(const std::vector<double>& series,
                               const SmoothingConfig& config) {
    if (series.empty()) throw std::invalid_argument("max_filter: empty series");
    if (config.smoothing_factor < 0)
        throw std::invalid_argument("max_filter: negative smoothing factor");
    if (config.smoothing_factor == 0) return series;
    const int h = filter_halfwidth(config.smoothing_factor);
    const auto n = static_cast<std::ptrdiff_t>(series.size());
    std::vector<double> out(series.size());
    for (std::ptrdiff_t t = 0; t < n; ++t) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, t - h);
        const std::ptrdiff_t hi = std::min(n - 1, t + h);
        double m = series[lo];
        for (std::ptrdiff_t i = lo + 1; i <= hi; ++i) m = std::max(m, series[i]);
        out[t] = m;
    }
    return out;
}

DemandTrace smooth_trace(const DemandTrace& trace, const SmoothingConfig& config) {
    std::vector<double> series(trace.counts.begin(), trace.counts.end());
    auto filtered = max_filter(series, config);
    DemandTrace out = trace;
    for (std::size_t t = 0; t < filtered.size(); ++t)
        out.counts[t] = static_cast<std::int64_t>(std::llround(filtered[t]));
    return out;
}

double pattern_mean(const SyntheticTraceSpec& spec, int t) {
    switch (spec.pattern) {
        case TracePattern::constant:
            return spec.base_rate;
        case TracePattern::diurnal: {
            // trough at phase 0, peak mid-period
            const double phase = 2.0 * M_PI * t / spec.period_intervals;
            return spec.base_rate +
                   (spec.peak_rate - spec.base_rate) * 0.5 * (1.0 - std::cos(phase));
        }
        case TracePattern::hourly_spikes:
            return (t % spec.period_intervals == 0) ? spec.peak_rate : spec.base_rate;
        case TracePattern::sporadic_spikes:
            // handled in generate_trace (spike placement is stochastic)
            return spec.base_rate;
    }
    return spec.base_rate;
}

DemandTrace generate_trace(const SyntheticTraceSpec& spec) {
    if (spec.horizon_intervals < 1)
        throw std::invalid_argument("generate_trace: horizon_intervals must be >= 1");
    if (spec.peak_rate < spec.base_rate)
        throw std::invalid_argument("generate_trace: peak_rate < base_rate");
    std::mt19937_64 rng(spec.noise_seed);
    std::vector<double> mean(static_cast<std::size_t>(spec.horizon_intervals));
    for (int t = 0; t < spec.horizon_intervals; ++t)
        mean[static_cast<std::size_t>(t)] = pattern_mean(spec, t);
    if (spec.pattern == TracePattern::sporadic_spikes) {
        // spikes roughly every period, jittered
        std::uniform_real_distribution<double> jitter(-spec.spike_period_jitter,
                                                      spec.spike_period_jitter);
        double next = spec.period_intervals * (0.5 + (spec.spike_period_jitter > 0 ? jitter(rng) : 0.0));
        while (next < spec.horizon_intervals) {
            const int at = static_cast<int>(next);
            if (at >= 0 && at < spec.horizon_intervals)
                mean[static_cast<std::size_t>(at)] = spec.peak_rate;
            double step = spec.period_intervals *
                          (1.0 + (spec.spike_period_jitter > 0 ? jitter(rng) : 0.0));
            next += std::max(1.0, step);
        }
    }
    DemandTrace trace;
    trace.interval_seconds = spec.interval_seconds;
    trace.start_time = spec.start_time;
    trace.counts.resize(mean.size());
    for (std::size_t t = 0; t < mean.size(); ++t) {
        if (mean[t] <= 0.0) {
            trace.counts[t] = 0;
            continue;
        }
        std::poisson_distribution<std::int64_t> noise(mean[t]);
        trace.counts[t] = noise(rng);
    }
    return trace;
}

DemandTrace read_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (!std::getline(in, line)) fail("empty file");
    ++lineno;
    if (line == "timestamp,count\r") line.pop_back();
    if (line != "timestamp,count") fail("missing header `timestamp,count`");

    DemandTrace trace;
    std::int64_t prev_ts = 0;
    bool first = true;
    std::int64_t step = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) fail("expected `timestamp,count`");
        std::int64_t ts = 0, count = 0;
        try {
            ts = std::stoll(line.substr(0, comma));
            count = std::stoll(line.substr(comma + 1));
        } catch (const std::exception&) {
            fail("malformed row");
        }
        if (count < 0) fail("negative count");
        if (first) {
            trace.start_time = ts;
            first = false;
        } else {
            if (ts <= prev_ts) fail("non-monotone timestamp");
            if (step == 0) {
                step = ts - prev_ts;
            } else if (ts - prev_ts != step) {
                fail("non-uniform interval width");
            }
        }
        prev_ts = ts;
        trace.counts.push_back(count);
    }
    if (trace.counts.empty()) fail("no data rows");
    if (step == 0) fail("need at least two rows to infer interval width");
    trace.interval_seconds = step;
    return trace;
}

void write_trace(const DemandTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace file: " + path);
    out << "timestamp,count\n";
    for (std::size_t t = 0; t < trace.counts.size(); ++t)
        out << (trace.start_time + static_cast<std::int64_t>(t) * trace.interval_seconds)
            << ',' << trace.counts[t] << '\n';
}

}  // namespace poolcast
