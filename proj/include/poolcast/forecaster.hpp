#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace poolcast {

/// Rank selection for the SSA decomposition: keep a fixed number of
/// components, or enough to cover a fraction of the singular energy.
struct RankPolicy {
    enum class Kind { fixed, energy } kind = Kind::energy;
    int fixed_rank = 1;
    double energy_threshold = 0.9;

    static RankPolicy fixed(int r) { return {Kind::fixed, r, 0.0}; }
    static RankPolicy energy(double threshold) { return {Kind::energy, 1, threshold}; }
};

/// Singular spectrum analysis state: Hankel-embedding decomposition plus the
/// linear recurrence used for forecasting.
struct SsaModel {
    int window_length = 150;  // L
    int rank = 1;             // retained components
    std::vector<double> singular_values;
    Eigen::MatrixXd left_vectors;                 // L x rank
    std::vector<double> recurrence_coefficients;  // length L-1, chronological
    int train_series_length = 1800;
};

SsaModel ssa_fit(const std::vector<double>& series, int window_length,
                 const RankPolicy& policy = {});

/// Rank-r projection of the series' trajectory matrix onto the model's left
/// subspace, diagonally averaged back to a series.
std::vector<double> ssa_reconstruct(const SsaModel& model, const std::vector<double>& series);

/// Recurrent forecast: each step applies the recurrence to the last L-1
/// reconstructed-then-rolled-forward values. Demand callers clamp at zero.
std::vector<double> ssa_forecast(const SsaModel& model, const std::vector<double>& history,
                                 int horizon, bool clamp_non_negative = false);

struct AsymmetricLoss {
    double loss = 0.0;
    std::vector<double> gradient;  // d loss / d y_hat
};

/// Pinball-style loss: mean of alpha'*max(y - y_hat, 0) + (1-alpha')*max(y_hat - y, 0).
/// Subgradient 0 at the kink.
AsymmetricLoss asymmetric_loss(const std::vector<double>& y, const std::vector<double>& y_hat,
                               double alpha_prime_loss);

/// Shallow two-layer ReLU net (5 -> 4 -> 1 by default, 29 parameters) that
/// predicts the SSA forecast error.
struct ErrorCorrector {
    int input_dim = 5;
    int hidden_dim = 4;
    Eigen::MatrixXd weights_1;     // hidden x input
    Eigen::VectorXd bias_1;        // hidden
    Eigen::RowVectorXd weights_2;  // 1 x hidden
    double bias_2 = 0.0;

    // feature configuration (fixed at training time)
    double feature_scale = 1.0;
    int phase_period_intervals = 2880;  // one day of 30 s intervals
    int recent_window = 10;

    int parameter_count() const {
        return input_dim * hidden_dim + hidden_dim + hidden_dim + 1;
    }
    double forward(const Eigen::VectorXd& features) const;
};

struct CorrectorGradients {
    Eigen::MatrixXd weights_1;
    Eigen::VectorXd bias_1;
    Eigen::RowVectorXd weights_2;
    double bias_2 = 0.0;
};

/// Analytic gradient of asymmetric_loss(target, base_prediction + net(features))
/// with respect to the corrector parameters, for one sample.
CorrectorGradients corrector_gradient(const ErrorCorrector& net, const Eigen::VectorXd& features,
                                      double base_prediction, double target,
                                      double alpha_prime_loss);

struct TrainingConfig {
    double alpha_prime_loss = 0.5;
    int epochs = 15;
    int batch_size = 768;
    double learning_rate = 0.001;
    int horizon = 120;  // 1 h of 30 s intervals in the production loop
    std::uint64_t seed = 0;
    int hidden_dim = 4;
    int phase_period_intervals = 2880;
    int recent_window = 10;
    double validation_fraction = 0.1;  // time-ordered tail, early-stop guard
    int early_stop_patience = 3;
};

/// Feature vector for one prediction point: [ssa prediction / scale,
/// sin(phase), cos(phase), recent mean / scale, recent max / scale].
Eigen::VectorXd corrector_features(double ssa_prediction, std::int64_t time_index,
                                   double recent_mean, double recent_max,
                                   const ErrorCorrector& net);

/// Mini-batch gradient descent on the asymmetric loss of
/// (truth, SSA prediction + corrector output). Deterministic for a fixed seed.
ErrorCorrector train_hybrid(const std::vector<double>& series, const SsaModel& ssa,
                            const TrainingConfig& config);

/// max(0, ssa_forecast + corrector(features)) per step.
std::vector<double> predict_hybrid(const SsaModel& ssa, const ErrorCorrector& corrector,
                                   const std::vector<double>& history, int horizon);

struct BaselineConfig {
    double gamma = 1.0;
};

/// No-intelligence forecast: constant gamma * max(train_series).
std::vector<double> baseline_predict(const std::vector<double>& train_series,
                                     const BaselineConfig& config, int horizon);

struct AccuracyMetrics {
    double mae = 0.0;
    double rmse = 0.0;
};

AccuracyMetrics accuracy_metrics(const std::vector<double>& y, const std::vector<double>& y_hat);

/// Versioned text format holding every SsaModel and ErrorCorrector field;
/// numbers are hex floats, so the round trip is exact.
void save_hybrid_model(const std::string& path, const SsaModel& ssa,
                       const ErrorCorrector& corrector);
std::pair<SsaModel, ErrorCorrector> load_hybrid_model(const std::string& path);

}  // namespace poolcast
