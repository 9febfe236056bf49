#include "poolcast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace poolcast {

namespace {

std::vector<double> to_doubles(const std::vector<std::int64_t>& counts) {
    return {counts.begin(), counts.end()};
}

/// History tail limited to the configured window, then Eq.-style max-filter
/// smoothing.
std::vector<double> prepare_series(const std::vector<std::int64_t>& counts,
                                   const PipelineConfig& cfg) {
    const std::size_t window = static_cast<std::size_t>(cfg.history_window_intervals);
    std::vector<std::int64_t> tail = counts;
    if (tail.size() > window)
        tail.erase(tail.begin(), tail.end() - static_cast<std::ptrdiff_t>(window));
    return max_filter(to_doubles(tail), cfg.smoothing);
}

double mean_abs_error(const std::vector<double>& y, const std::vector<double>& y_hat) {
    return accuracy_metrics(y, y_hat).mae;
}

int effective_window(const PipelineConfig& cfg, std::size_t n) {
    return std::max(2, std::min(cfg.ssa_window_length, static_cast<int>(n / 2)));
}

/// A forecaster fitted once, then asked to predict from ever-growing series.
struct TrainedForecaster {
    bool degraded = false;
    bool use_hook = false;
    double baseline_level = 0.0;
    double hybrid_mae = 0.0;
    double baseline_mae = 0.0;
    SsaModel ssa;
    ErrorCorrector net;
};

TrainedForecaster fit_forecaster(const std::vector<double>& series, const PipelineConfig& cfg,
                                 const TrainingConfig& training, int horizon_steps) {
    if (series.size() < 8)
        throw std::invalid_argument("pipeline: history too short to fit a forecaster");
    TrainedForecaster tf;
    tf.use_hook = static_cast<bool>(cfg.forecaster_hook);
    tf.baseline_level =
        cfg.baseline_gamma * *std::max_element(series.begin(), series.end());

    const int full_window = effective_window(cfg, series.size());

    // accuracy guardrail on a held-out tail
    std::size_t tail = std::min<std::size_t>(static_cast<std::size_t>(horizon_steps),
                                             series.size() / 5);
    const std::size_t min_train = 2 * static_cast<std::size_t>(full_window);
    if (series.size() - tail < min_train) tail = series.size() - min_train;
    if (tail >= 1 && cfg.guardrail_multiplier > 0.0) {
        const std::vector<double> train(series.begin(),
                                        series.end() - static_cast<std::ptrdiff_t>(tail));
        const std::vector<double> actual(series.end() - static_cast<std::ptrdiff_t>(tail),
                                         series.end());
        std::vector<double> predicted;
        if (tf.use_hook) {
            predicted = cfg.forecaster_hook(train, static_cast<int>(tail));
        } else {
            const int w = effective_window(cfg, train.size());
            auto ssa = ssa_fit(train, w, cfg.rank_policy);
            auto net = train_hybrid(train, ssa, training);
            predicted = predict_hybrid(ssa, net, train, static_cast<int>(tail));
        }
        if (predicted.size() != tail)
            throw std::runtime_error("pipeline: forecaster returned the wrong length");
        const auto baseline = baseline_predict(train, {cfg.baseline_gamma},
                                               static_cast<int>(tail));
        tf.hybrid_mae = mean_abs_error(actual, predicted);
        tf.baseline_mae = mean_abs_error(actual, baseline);
        tf.degraded = tf.hybrid_mae > cfg.guardrail_multiplier * tf.baseline_mae + 1e-9;
    }

    if (!tf.degraded && !tf.use_hook) {
        tf.ssa = ssa_fit(series, full_window, cfg.rank_policy);
        tf.net = train_hybrid(series, tf.ssa, training);
    }
    return tf;
}

std::vector<double> forecast_with(const TrainedForecaster& tf, const PipelineConfig& cfg,
                                  const std::vector<double>& extended, int steps) {
    if (tf.degraded) return std::vector<double>(static_cast<std::size_t>(steps),
                                                tf.baseline_level);
    std::vector<double> out;
    if (tf.use_hook) {
        out = cfg.forecaster_hook(extended, steps);
        if (out.size() != static_cast<std::size_t>(steps))
            throw std::runtime_error("pipeline: forecaster returned the wrong length");
        for (double& v : out) v = std::max(0.0, v);
    } else {
        out = predict_hybrid(tf.ssa, tf.net, extended, steps);
    }
    return out;
}

PoolSchedule finish_schedule(const PoolSchedule& continuous, const PipelineConfig& cfg) {
    auto schedule = round_schedule(continuous, cfg.optimizer);
    if (cfg.schedule_smoothing) {
        schedule = smooth_schedule(schedule, cfg.optimizer.tau_intervals);
        schedule = round_schedule(schedule, cfg.optimizer);  // re-apply ramp repair
    }
    if (!schedule.feasible(cfg.optimizer.max_new_request))
        throw std::logic_error("pipeline: produced an infeasible schedule");
    return schedule;
}

int blocks_per_horizon(const PipelineConfig& cfg) {
    const int s = cfg.optimizer.stableness_intervals;
    return (cfg.horizon_intervals + s - 1) / s;
}

/// Historic optimal pool sizes: rolling LP windows of one horizon stepped by
/// one stability block, each contributing its first-block (continuous) value.
std::vector<double> optimal_labels(const std::vector<double>& smoothed,
                                   std::int64_t interval_seconds, const PipelineConfig& cfg) {
    const std::size_t h = static_cast<std::size_t>(cfg.horizon_intervals);
    const std::size_t s = static_cast<std::size_t>(cfg.optimizer.stableness_intervals);
    if (smoothed.size() < h)
        throw std::invalid_argument("pipeline: history shorter than one horizon window");
    std::vector<double> labels;
    for (std::size_t start = 0; start + h <= smoothed.size(); start += s) {
        const std::vector<double> window(smoothed.begin() + static_cast<std::ptrdiff_t>(start),
                                         smoothed.begin() +
                                             static_cast<std::ptrdiff_t>(start + h));
        auto sol = solve(build_lp(window, interval_seconds, cfg.optimizer));
        labels.push_back(sol.schedule.values.front());
    }
    return labels;
}

TrainingConfig label_training(const PipelineConfig& cfg) {
    TrainingConfig t = cfg.training;
    t.phase_period_intervals =
        std::max(1, cfg.training.phase_period_intervals / cfg.optimizer.stableness_intervals);
    return t;
}

PoolSchedule schedule_from_label_forecast(const std::vector<double>& blocks,
                                          std::int64_t interval_seconds,
                                          const PipelineConfig& cfg) {
    std::vector<double> clamped = blocks;
    for (double& v : clamped)
        v = std::clamp(v, cfg.optimizer.min_pool, cfg.optimizer.max_pool);
    auto continuous = PoolSchedule::from_blocks(
        clamped, cfg.optimizer.stableness_intervals,
        static_cast<std::size_t>(cfg.horizon_intervals), interval_seconds,
        cfg.optimizer.min_pool, cfg.optimizer.max_pool);
    return finish_schedule(continuous, cfg);
}

std::int64_t end_time(const DemandTrace& history) {
    return history.start_time +
           static_cast<std::int64_t>(history.counts.size()) * history.interval_seconds;
}

void validate_pipeline(const DemandTrace& history, const PipelineConfig& cfg) {
    cfg.optimizer.validate();
    if (cfg.horizon_intervals < 1)
        throw std::invalid_argument("pipeline: horizon must be positive");
    if (cfg.history_window_intervals < 1)
        throw std::invalid_argument("pipeline: history window must be positive");
    if (history.counts.empty()) throw std::invalid_argument("pipeline: empty history");
}

EvalPoint eval_point(const SimulationReport& rep, std::int64_t interval_seconds,
                     double alpha_prime, bool is_baseline) {
    EvalPoint p;
    p.alpha_prime = alpha_prime;
    p.is_baseline = is_baseline;
    p.idle_seconds = rep.total_idle_intervals * static_cast<double>(interval_seconds);
    p.wait_seconds = rep.total_wait_intervals * static_cast<double>(interval_seconds);
    if (!rep.per_request_wait.empty()) {
        double sum = 0.0;
        for (double w : rep.per_request_wait) sum += w;
        p.avg_wait_seconds = sum * static_cast<double>(interval_seconds) /
                             static_cast<double>(rep.per_request_wait.size());
    }
    p.hit_rate = rep.hit_rate;
    return p;
}

DemandTrace truncate_trace(const DemandTrace& trace, std::size_t n) {
    DemandTrace t = trace;
    t.counts.resize(n);
    return t;
}

/// Stitches per-window recommendations into one schedule covering `future`,
/// re-forecasting each window from everything observed before it.
PoolSchedule dynamic_schedule(const DemandTrace& history, const DemandTrace& future,
                              const PipelineConfig& cfg, const TrainedForecaster* two_step_tf) {
    const std::size_t h = static_cast<std::size_t>(cfg.horizon_intervals);
    const std::size_t windows = future.counts.size() / h;
    std::vector<double> values;
    std::vector<std::int64_t> observed = history.counts;
    for (std::size_t w = 0; w < windows; ++w) {
        PoolSchedule part;
        if (cfg.mode == PipelineMode::two_step) {
            const auto series = prepare_series(observed, cfg);
            const auto fc = forecast_with(*two_step_tf, cfg, series, cfg.horizon_intervals);
            auto sol = solve(build_lp(fc, history.interval_seconds, cfg.optimizer));
            part = finish_schedule(sol.schedule, cfg);
        } else {
            // labels over everything observed so far; model fitted once below
            PipelineConfig local = cfg;
            DemandTrace obs = history;
            obs.counts = observed;
            part = recommend_e2e(obs, local).schedule;
        }
        values.insert(values.end(), part.values.begin(), part.values.end());
        observed.insert(observed.end(),
                        future.counts.begin() + static_cast<std::ptrdiff_t>(w * h),
                        future.counts.begin() + static_cast<std::ptrdiff_t>((w + 1) * h));
    }
    PoolSchedule out;
    out.interval_seconds = history.interval_seconds;
    out.values = std::move(values);
    out.block_length = cfg.optimizer.stableness_intervals;
    out.min_pool = cfg.optimizer.min_pool;
    out.max_pool = cfg.optimizer.max_pool;
    return out;
}

}  // namespace

PipelineMode parse_mode(const std::string& name) {
    if (name == "two_step") return PipelineMode::two_step;
    if (name == "e2e") return PipelineMode::e2e;
    throw std::invalid_argument("unknown pipeline mode: " + name);
}

std::string mode_name(PipelineMode mode) {
    return mode == PipelineMode::two_step ? "two_step" : "e2e";
}

Recommendation recommend_two_step(const DemandTrace& history, const PipelineConfig& cfg) {
    validate_pipeline(history, cfg);
    const auto series = prepare_series(history.counts, cfg);
    auto tf = fit_forecaster(series, cfg, cfg.training, cfg.horizon_intervals);
    auto forecast = forecast_with(tf, cfg, series, cfg.horizon_intervals);

    auto sol = solve(build_lp(forecast, history.interval_seconds, cfg.optimizer));
    Recommendation rec;
    rec.generated_at = end_time(history);
    rec.horizon_intervals = cfg.horizon_intervals;
    rec.schedule = finish_schedule(sol.schedule, cfg);
    rec.source_mode = PipelineMode::two_step;
    rec.forecast = std::move(forecast);
    rec.alpha_prime_used = cfg.optimizer.effective_alpha_prime();
    rec.degraded = tf.degraded;
    return rec;
}

Recommendation recommend_e2e(const DemandTrace& history, const PipelineConfig& cfg) {
    validate_pipeline(history, cfg);
    const auto series = prepare_series(history.counts, cfg);
    const auto labels = optimal_labels(series, history.interval_seconds, cfg);
    const int blocks = blocks_per_horizon(cfg);
    // the last label sits at window-start n - horizon; forecast far enough to
    // reach the blocks covering [n, n + horizon)
    const int s = cfg.optimizer.stableness_intervals;
    const std::int64_t last_start = static_cast<std::int64_t>(labels.size() - 1) * s;
    const std::int64_t gap = static_cast<std::int64_t>(series.size()) - last_start;
    const int steps = static_cast<int>((gap + s - 1) / s) + blocks - 1;
    auto tf = fit_forecaster(labels, cfg, label_training(cfg), steps);
    auto all = forecast_with(tf, cfg, labels, steps);
    const std::vector<double> block_forecast(all.end() - blocks, all.end());

    Recommendation rec;
    rec.generated_at = end_time(history);
    rec.horizon_intervals = cfg.horizon_intervals;
    rec.schedule = schedule_from_label_forecast(block_forecast, history.interval_seconds, cfg);
    rec.source_mode = PipelineMode::e2e;
    rec.alpha_prime_used = cfg.optimizer.effective_alpha_prime();
    rec.degraded = tf.degraded;
    return rec;
}

Recommendation recommend(const DemandTrace& history, const PipelineConfig& cfg) {
    return cfg.mode == PipelineMode::two_step ? recommend_two_step(history, cfg)
                                              : recommend_e2e(history, cfg);
}

EvaluationReport pareto_sweep(const DemandTrace& history, const DemandTrace& future,
                              const PipelineConfig& cfg, std::vector<double> alphas) {
    if (alphas.empty()) throw std::invalid_argument("pareto_sweep: empty alpha list");
    for (double a : alphas)
        if (a < 0.0 || a > 1.0)
            throw std::invalid_argument("pareto_sweep: alpha' outside [0, 1]");
    if (future.interval_seconds != history.interval_seconds)
        throw std::invalid_argument("pareto_sweep: interval width mismatch");
    const std::size_t h = static_cast<std::size_t>(cfg.horizon_intervals);
    const std::size_t windows = future.counts.size() / h;
    if (windows < 1)
        throw std::invalid_argument("pareto_sweep: future shorter than one horizon");
    const auto eval_future = truncate_trace(future, windows * h);

    std::sort(alphas.begin(), alphas.end());

    // the two_step forecaster is alpha'-independent: fit once
    TrainedForecaster shared_tf;
    if (cfg.mode == PipelineMode::two_step) {
        const auto series = prepare_series(history.counts, cfg);
        shared_tf = fit_forecaster(series, cfg, cfg.training, cfg.horizon_intervals);
    }

    SimulatorConfig sim;
    sim.tau_intervals = cfg.optimizer.tau_intervals;

    EvaluationReport report;
    for (double a : alphas) {
        PipelineConfig local = cfg;
        local.optimizer.alpha_prime = a;
        local.optimizer.legacy_alpha.reset();
        local.optimizer.legacy_beta.reset();
        auto schedule = dynamic_schedule(history, eval_future, local, &shared_tf);
        auto rep = simulate(eval_future, schedule, sim);
        report.points.push_back(eval_point(rep, history.interval_seconds, a, false));
    }

    // no-intelligence static baseline: gamma * peak of the smoothed history
    const auto series = prepare_series(history.counts, cfg);
    const double level =
        std::clamp(std::ceil(cfg.baseline_gamma *
                             *std::max_element(series.begin(), series.end())),
                   cfg.optimizer.min_pool, cfg.optimizer.max_pool);
    auto static_schedule = PoolSchedule::constant(level, eval_future.counts.size(),
                                                  history.interval_seconds,
                                                  cfg.optimizer.min_pool, cfg.optimizer.max_pool);
    auto static_rep = simulate(eval_future, static_schedule, sim);
    report.baseline_static = eval_point(static_rep, history.interval_seconds,
                                        cfg.optimizer.effective_alpha_prime(), true);
    report.points.push_back(report.baseline_static);
    std::stable_sort(report.points.begin(), report.points.end(),
                     [](const EvalPoint& x, const EvalPoint& y) {
                         return x.alpha_prime < y.alpha_prime;
                     });

    // idle saved by the best dynamic point that does not lose hit rate
    double best_idle = -1.0;
    for (const auto& p : report.points)
        if (!p.is_baseline && p.hit_rate >= report.baseline_static.hit_rate - 1e-12)
            if (best_idle < 0.0 || p.idle_seconds < best_idle) best_idle = p.idle_seconds;
    if (best_idle >= 0.0 && report.baseline_static.idle_seconds > 0.0)
        report.idle_reduction_vs_static =
            1.0 - best_idle / report.baseline_static.idle_seconds;
    return report;
}

void write_report_csv(const EvaluationReport& report, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_report_csv: cannot open " + path);
    os << "alpha_prime,idle_seconds,wait_seconds,avg_wait_seconds,hit_rate,is_baseline\n";
    for (const auto& p : report.points)
        os << p.alpha_prime << ',' << p.idle_seconds << ',' << p.wait_seconds << ','
           << p.avg_wait_seconds << ',' << p.hit_rate << ',' << (p.is_baseline ? 1 : 0)
           << '\n';
    if (!os) throw std::runtime_error("write_report_csv: write failed for " + path);
}

StaticComparison compare_static(const DemandTrace& history, const DemandTrace& future,
                                const PipelineConfig& cfg, double target_hit_rate) {
    if (target_hit_rate <= 0.0 || target_hit_rate > 1.0)
        throw std::invalid_argument("compare_static: target hit rate must be in (0, 1]");
    const std::size_t h = static_cast<std::size_t>(cfg.horizon_intervals);
    const std::size_t windows = future.counts.size() / h;
    if (windows < 1)
        throw std::invalid_argument("compare_static: future shorter than one horizon");
    const auto eval_future = truncate_trace(future, windows * h);

    SimulatorConfig sim;
    sim.tau_intervals = cfg.optimizer.tau_intervals;

    StaticComparison out;

    // smallest constant pool meeting the target
    bool found = false;
    for (double n = std::ceil(cfg.optimizer.min_pool); n <= cfg.optimizer.max_pool + 1e-9;
         n += 1.0) {
        auto schedule =
            PoolSchedule::constant(n, eval_future.counts.size(), history.interval_seconds,
                                   cfg.optimizer.min_pool, cfg.optimizer.max_pool);
        auto rep = simulate(eval_future, schedule, sim);
        if (rep.hit_rate >= target_hit_rate) {
            out.static_pool = n;
            out.static_point = eval_point(rep, history.interval_seconds, 0.0, true);
            found = true;
            break;
        }
    }
    if (!found)
        throw std::runtime_error(
            "compare_static: target hit rate unreachable even at max_pool");

    TrainedForecaster shared_tf;
    if (cfg.mode == PipelineMode::two_step) {
        const auto series = prepare_series(history.counts, cfg);
        shared_tf = fit_forecaster(series, cfg, cfg.training, cfg.horizon_intervals);
    }
    std::map<double, EvalPoint> cache;
    auto eval_alpha = [&](double a) -> const EvalPoint& {
        auto it = cache.find(a);
        if (it != cache.end()) return it->second;
        PipelineConfig local = cfg;
        local.optimizer.alpha_prime = a;
        local.optimizer.legacy_alpha.reset();
        local.optimizer.legacy_beta.reset();
        auto schedule = dynamic_schedule(history, eval_future, local, &shared_tf);
        auto rep = simulate(eval_future, schedule, sim);
        return cache.emplace(a, eval_point(rep, history.interval_seconds, a, false))
            .first->second;
    };

    // hit rate is monotone non-increasing in alpha' at the LP level: bisect
    // for the largest alpha' still meeting the target
    double alpha = 0.0;
    if (eval_alpha(1.0).hit_rate >= target_hit_rate) {
        alpha = 1.0;
    } else if (eval_alpha(0.0).hit_rate < target_hit_rate) {
        throw std::runtime_error(
            "compare_static: target hit rate unreachable even at max_pool");
    } else {
        double lo = 0.0, hi = 1.0;  // lo meets the target, hi does not
        for (int iter = 0; iter < 20; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (eval_alpha(mid).hit_rate >= target_hit_rate)
                lo = mid;
            else
                hi = mid;
        }
        alpha = lo;
    }

    out.alpha_prime = alpha;
    out.dynamic_point = eval_alpha(alpha);
    out.idle_reduction =
        out.static_point.idle_seconds > 0.0
            ? 1.0 - out.dynamic_point.idle_seconds / out.static_point.idle_seconds
            : 0.0;
    return out;
}

void write_recommendation(const Recommendation& rec, const std::string& path) {
    nlohmann::json j;
    j["generated_at"] = rec.generated_at;
    j["horizon_intervals"] = rec.horizon_intervals;
    j["source_mode"] = mode_name(rec.source_mode);
    j["alpha_prime_used"] = rec.alpha_prime_used;
    j["degraded"] = rec.degraded;
    j["interval_seconds"] = rec.schedule.interval_seconds;
    j["block_length"] = rec.schedule.block_length;
    j["min_pool"] = rec.schedule.min_pool;
    j["max_pool"] = rec.schedule.max_pool;
    j["schedule"] = rec.schedule.values;
    j["forecast"] = rec.forecast;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_recommendation: cannot open " + path);
    os << j.dump(2) << '\n';
    if (!os) throw std::runtime_error("write_recommendation: write failed for " + path);
}

Recommendation read_recommendation(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_recommendation: cannot open " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("read_recommendation: bad JSON in " + path + ": " + e.what());
    }
    Recommendation rec;
    rec.generated_at = j.at("generated_at").get<std::int64_t>();
    rec.horizon_intervals = j.at("horizon_intervals").get<int>();
    rec.source_mode = parse_mode(j.at("source_mode").get<std::string>());
    rec.alpha_prime_used = j.at("alpha_prime_used").get<double>();
    rec.degraded = j.at("degraded").get<bool>();
    rec.schedule.interval_seconds = j.at("interval_seconds").get<std::int64_t>();
    rec.schedule.block_length = j.at("block_length").get<int>();
    rec.schedule.min_pool = j.at("min_pool").get<double>();
    rec.schedule.max_pool = j.at("max_pool").get<double>();
    rec.schedule.values = j.at("schedule").get<std::vector<double>>();
    rec.forecast = j.at("forecast").get<std::vector<double>>();
    return rec;
}

}  // namespace poolcast
