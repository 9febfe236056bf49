#pragma once

#include <deque>
#include <string>

namespace poolcast {

/// Closed-loop alpha' tuning toward a target average wait. The recent
/// (alpha', wait) pairs approximate alpha' = f(t_wait) piecewise-linearly;
/// a sliding least-squares line picks the next knob value.
struct TunerState {
    struct Point {
        double alpha_prime = 0.5;
        double measured_wait = 0.0;  // seconds
    };

    std::deque<Point> history;  // at most kHistoryLimit, oldest first
    double target_wait = 0.0;   // seconds
    double current_alpha = 0.5;
    double damping = 0.5;  // in (0, 1]; 1 = jump straight to the fit

    static constexpr std::size_t kHistoryLimit = 10;
};

/// Appends one observation, evicting the oldest past the ring limit.
void observe(TunerState& state, double alpha_used, double measured_wait);

/// Least-squares fit of alpha' against wait over the history window,
/// evaluated at target_wait, damped toward current_alpha and clamped to
/// [0, 1]. Fewer than two points, or all waits equal, returns current_alpha.
double next_alpha(const TunerState& state);

/// JSON persistence so the recommendation loop survives restarts.
void save_tuner_state(const TunerState& state, const std::string& path);
TunerState load_tuner_state(const std::string& path);

}  // namespace poolcast
