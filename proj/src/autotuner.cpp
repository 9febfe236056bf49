#include "poolcast/autotuner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace poolcast {

void observe(TunerState& state, double alpha_used, double measured_wait) {
    if (alpha_used < 0.0 || alpha_used > 1.0)
        throw std::invalid_argument("observe: alpha_used must lie in [0, 1]");
    if (measured_wait < 0.0 || !std::isfinite(measured_wait))
        throw std::invalid_argument("observe: measured_wait must be finite and non-negative");
    state.history.push_back({alpha_used, measured_wait});
    while (state.history.size() > TunerState::kHistoryLimit) state.history.pop_front();
}

double next_alpha(const TunerState& state) {
    const std::size_t n = state.history.size();
    if (n < 2) return state.current_alpha;

    // OLS of alpha' on wait: alpha' = a + b * wait
    double sw = 0.0, sa = 0.0, sww = 0.0, swa = 0.0;
    for (const auto& p : state.history) {
        sw += p.measured_wait;
        sa += p.alpha_prime;
        sww += p.measured_wait * p.measured_wait;
        swa += p.measured_wait * p.alpha_prime;
    }
    const double nn = static_cast<double>(n);
    const double var = sww - sw * sw / nn;
    if (var <= 1e-12 * std::max(1.0, sww)) return state.current_alpha;  // all waits equal

    const double b = (swa - sw * sa / nn) / var;
    const double a = (sa - b * sw) / nn;
    const double fitted = a + b * state.target_wait;
    const double damped =
        state.current_alpha + state.damping * (fitted - state.current_alpha);
    return std::clamp(damped, 0.0, 1.0);
}

void save_tuner_state(const TunerState& state, const std::string& path) {
    nlohmann::json j;
    j["target_wait"] = state.target_wait;
    j["current_alpha"] = state.current_alpha;
    j["damping"] = state.damping;
    j["history"] = nlohmann::json::array();
    for (const auto& p : state.history)
        j["history"].push_back({{"alpha_prime", p.alpha_prime}, {"wait", p.measured_wait}});
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_tuner_state: cannot open " + path);
    os << j.dump(2) << '\n';
}

TunerState load_tuner_state(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_tuner_state: cannot open " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_tuner_state: bad JSON in " + path + ": " + e.what());
    }
    TunerState state;
    state.target_wait = j.at("target_wait").get<double>();
    state.current_alpha = j.at("current_alpha").get<double>();
    state.damping = j.at("damping").get<double>();
    for (const auto& p : j.at("history"))
        state.history.push_back(
            {p.at("alpha_prime").get<double>(), p.at("wait").get<double>()});
    while (state.history.size() > TunerState::kHistoryLimit) state.history.pop_front();
    return state;
}

}  // namespace poolcast
