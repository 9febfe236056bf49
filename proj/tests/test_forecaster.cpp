#include <stdexcept>
#include <cmath>
#include <cstdio>
#include <random>

#include "doctest.h"
#include "poolcast/forecaster.hpp"

using namespace poolcast;

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

std::vector<double> sinusoid(int n, double period, double amplitude = 1.0, double offset = 0.0) {
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t)
        s[static_cast<std::size_t>(t)] = offset + amplitude * std::sin(kTwoPi * t / period);
    return s;
}

// one-step-ahead hybrid prediction per training point, mirroring the
// documented feature definition
struct PointwiseEval {
    std::vector<double> truth;
    std::vector<double> prediction;  // base + corrector, unclamped
    std::vector<double> corrections;
};

PointwiseEval pointwise_eval(const std::vector<double>& series, const SsaModel& ssa,
                             const ErrorCorrector& net) {
    const auto recon = ssa_reconstruct(ssa, series);
    const int lag = ssa.window_length - 1;
    const std::size_t first =
        static_cast<std::size_t>(std::max(ssa.window_length, net.recent_window));
    PointwiseEval ev;
    for (std::size_t t = first; t < series.size(); ++t) {
        double base = 0.0;
        for (int i = 0; i < lag; ++i)
            base += ssa.recurrence_coefficients[static_cast<std::size_t>(i)] *
                    recon[t - static_cast<std::size_t>(lag) + static_cast<std::size_t>(i)];
        const std::size_t w = static_cast<std::size_t>(net.recent_window);
        double mean = 0.0, mx = series[t - w];
        for (std::size_t i = t - w; i < t; ++i) {
            mean += series[i];
            mx = std::max(mx, series[i]);
        }
        mean /= static_cast<double>(w);
        const auto feat = corrector_features(base, static_cast<std::int64_t>(t), mean, mx, net);
        const double corr = net.forward(feat);
        ev.truth.push_back(series[t]);
        ev.prediction.push_back(base + corr);
        ev.corrections.push_back(corr);
    }
    return ev;
}

ErrorCorrector zero_net(double bias = 0.0) {
    ErrorCorrector net;
    net.weights_1 = Eigen::MatrixXd::Zero(net.hidden_dim, net.input_dim);
    net.bias_1 = Eigen::VectorXd::Zero(net.hidden_dim);
    net.weights_2 = Eigen::RowVectorXd::Zero(net.hidden_dim);
    net.bias_2 = bias;
    return net;
}

}  // namespace

TEST_CASE("ssa_fit constant series yields a rank-1 fixed point") {
    std::vector<double> series(64, 3.5);
    auto model = ssa_fit(series, 8, RankPolicy::energy(0.9));
    CHECK(model.rank == 1);
    auto fc = ssa_forecast(model, series, 20);
    for (double v : fc) CHECK(v == doctest::Approx(3.5).epsilon(1e-9));
}

TEST_CASE("ssa_fit captures a pure sinusoid with rank 2") {
    auto series = sinusoid(480, 12.0);
    auto model = ssa_fit(series, 24, RankPolicy::energy(0.9));
    CHECK(model.rank == 2);

    auto recon = ssa_reconstruct(model, series);
    double sq = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double e = recon[i] - series[i];
        sq += e * e;
    }
    CHECK(std::sqrt(sq / static_cast<double>(series.size())) < 1e-6);

    auto fc = ssa_forecast(model, series, 100);
    double mae = 0.0;
    for (int h = 0; h < 100; ++h)
        mae += std::abs(fc[static_cast<std::size_t>(h)] - std::sin(kTwoPi * (480 + h) / 12.0));
    CHECK(mae / 100.0 < 0.05);
}

TEST_CASE("ssa two-sinusoid mixture MAE under 1% of amplitude") {
    std::vector<double> series(600);
    for (int t = 0; t < 600; ++t)
        series[static_cast<std::size_t>(t)] =
            2.0 * std::sin(kTwoPi * t / 24.0) + 1.0 * std::sin(kTwoPi * t / 7.0);
    auto model = ssa_fit(series, 48, RankPolicy::fixed(4));
    auto fc = ssa_forecast(model, series, 50);
    double mae = 0.0;
    for (int h = 0; h < 50; ++h) {
        const int t = 600 + h;
        const double truth = 2.0 * std::sin(kTwoPi * t / 24.0) + 1.0 * std::sin(kTwoPi * t / 7.0);
        mae += std::abs(fc[static_cast<std::size_t>(h)] - truth);
    }
    CHECK(mae / 50.0 < 0.03);  // 1% of the 3.0 total amplitude
}

TEST_CASE("ssa_fit survives white noise at energy 0.9") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> series(200);
    for (auto& v : series) v = noise(rng);
    auto model = ssa_fit(series, 20, RankPolicy::energy(0.9));
    CHECK(model.rank >= 1);
    for (double v : ssa_forecast(model, series, 30)) CHECK(std::isfinite(v));
}

TEST_CASE("ssa preconditions and degenerate horizons") {
    std::vector<double> series(64, 1.0);
    CHECK_THROWS_AS(ssa_fit(series, 40, RankPolicy{}), std::invalid_argument);
    CHECK_THROWS_AS(ssa_fit(series, 1, RankPolicy{}), std::invalid_argument);
    auto model = ssa_fit(series, 8, RankPolicy{});
    CHECK(ssa_forecast(model, series, 0).empty());
    std::vector<double> tiny(3, 1.0);
    CHECK_THROWS_AS(ssa_forecast(model, tiny, 5), std::invalid_argument);
}

TEST_CASE("ssa forecast clamp is opt-in") {
    // a decaying-to-negative trend: linear series continue downward
    std::vector<double> series(60);
    for (int t = 0; t < 60; ++t) series[static_cast<std::size_t>(t)] = 10.0 - 0.5 * t;
    auto model = ssa_fit(series, 10, RankPolicy::fixed(2));
    auto raw = ssa_forecast(model, series, 40, false);
    auto clamped = ssa_forecast(model, series, 40, true);
    CHECK(raw.back() < 0.0);
    for (double v : clamped) CHECK(v >= 0.0);
}

TEST_CASE("asymmetric_loss hand cases") {
    auto same = asymmetric_loss({2.0, -1.0}, {2.0, -1.0}, 0.7);
    CHECK(same.loss == 0.0);
    for (double g : same.gradient) CHECK(g == 0.0);

    auto under = asymmetric_loss({5.0}, {3.0}, 0.7);
    CHECK(under.loss == doctest::Approx(1.4));
    CHECK(under.gradient[0] == doctest::Approx(-0.7));

    auto over = asymmetric_loss({3.0}, {5.0}, 0.7);
    CHECK(over.loss == doctest::Approx(0.6));
    CHECK(over.gradient[0] == doctest::Approx(0.3));

    CHECK_THROWS_AS(asymmetric_loss({1.0}, {1.0, 2.0}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(asymmetric_loss({1.0}, {1.0}, 1.5), std::invalid_argument);
}

TEST_CASE("constant minimizer of the asymmetric loss is the empirical quantile") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> dist(0.0, 100.0);
    for (double alpha : {0.1, 0.5, 0.9}) {
        std::vector<double> sample(41);
        for (auto& v : sample) v = dist(rng);
        std::vector<double> sorted = sample;
        std::sort(sorted.begin(), sorted.end());
        const auto idx = static_cast<std::size_t>(
            std::ceil(alpha * static_cast<double>(sorted.size())) - 1);
        const double quantile = sorted[std::min(idx, sorted.size() - 1)];
        const double at_quantile =
            asymmetric_loss(sample, std::vector<double>(sample.size(), quantile), alpha).loss;
        for (double candidate : sorted) {
            const double at_candidate =
                asymmetric_loss(sample, std::vector<double>(sample.size(), candidate), alpha)
                    .loss;
            CHECK(at_quantile <= at_candidate + 1e-12);
        }
    }
}

TEST_CASE("corrector gradients match central finite differences") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const double h = 1e-5;
    int checked = 0;
    while (checked < 100) {
        ErrorCorrector net;
        net.weights_1 = Eigen::MatrixXd::NullaryExpr(net.hidden_dim, net.input_dim,
                                                     [&]() { return dist(rng); });
        net.bias_1 = Eigen::VectorXd::NullaryExpr(net.hidden_dim, [&]() { return dist(rng); });
        net.bias_2 = dist(rng);
        net.weights_2 =
            Eigen::RowVectorXd::NullaryExpr(net.hidden_dim, [&]() { return dist(rng); });
        Eigen::VectorXd feat =
            Eigen::VectorXd::NullaryExpr(net.input_dim, [&]() { return dist(rng); });
        const double base = dist(rng);
        const double target = 2.0 * dist(rng);
        const double alpha = 0.3;

        // stay away from both kink families
        const Eigen::VectorXd pre = net.weights_1 * feat + net.bias_1;
        if (pre.cwiseAbs().minCoeff() < 1e-2) continue;
        if (std::abs(target - (base + net.forward(feat))) < 1e-2) continue;

        auto analytic = corrector_gradient(net, feat, base, target, alpha);
        auto loss_at = [&](const ErrorCorrector& n) {
            return asymmetric_loss({target}, {base + n.forward(feat)}, alpha).loss;
        };
        auto check_rel = [&](double got, double want) {
            const double denom = std::max({std::abs(got), std::abs(want), 1e-8});
            CHECK(std::abs(got - want) / denom < 1e-4);
        };

        for (int i = 0; i < net.hidden_dim; ++i)
            for (int j = 0; j < net.input_dim; ++j) {
                ErrorCorrector up = net, dn = net;
                up.weights_1(i, j) += h;
                dn.weights_1(i, j) -= h;
                check_rel(analytic.weights_1(i, j), (loss_at(up) - loss_at(dn)) / (2 * h));
            }
        for (int i = 0; i < net.hidden_dim; ++i) {
            ErrorCorrector up = net, dn = net;
            up.bias_1(i) += h;
            dn.bias_1(i) -= h;
            check_rel(analytic.bias_1(i), (loss_at(up) - loss_at(dn)) / (2 * h));
            up = net;
            dn = net;
            up.weights_2(i) += h;
            dn.weights_2(i) -= h;
            check_rel(analytic.weights_2(i), (loss_at(up) - loss_at(dn)) / (2 * h));
        }
        ErrorCorrector up = net, dn = net;
        up.bias_2 += h;
        dn.bias_2 -= h;
        check_rel(analytic.bias_2, (loss_at(up) - loss_at(dn)) / (2 * h));
        ++checked;
    }
}

TEST_CASE("train_hybrid is deterministic for a fixed seed") {
    auto series = sinusoid(400, 24.0, 5.0, 6.0);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.5);
    for (auto& v : series) v += noise(rng);
    auto ssa = ssa_fit(series, 48, RankPolicy::fixed(3));
    TrainingConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 32;
    cfg.seed = 99;
    cfg.phase_period_intervals = 24;
    auto a = train_hybrid(series, ssa, cfg);
    auto b = train_hybrid(series, ssa, cfg);
    CHECK((a.weights_1.array() == b.weights_1.array()).all());
    CHECK((a.bias_1.array() == b.bias_1.array()).all());
    CHECK((a.weights_2.array() == b.weights_2.array()).all());
    CHECK(a.bias_2 == b.bias_2);
}

TEST_CASE("training does not lose to the freshly initialized network") {
    auto series = sinusoid(420, 24.0, 4.0, 5.0);
    std::mt19937_64 rng(12);
    std::normal_distribution<double> noise(0.0, 0.6);
    for (auto& v : series) v += noise(rng);
    auto ssa = ssa_fit(series, 48, RankPolicy::fixed(3));

    TrainingConfig cfg;
    cfg.epochs = 40;
    cfg.batch_size = 32;
    cfg.seed = 7;
    cfg.phase_period_intervals = 24;
    cfg.early_stop_patience = 40;
    auto trained = train_hybrid(series, ssa, cfg);

    // a vanishing learning rate leaves the seeded initialization untouched
    auto init_cfg = cfg;
    init_cfg.learning_rate = 1e-300;
    init_cfg.epochs = 1;
    auto initial = train_hybrid(series, ssa, init_cfg);

    auto ev_trained = pointwise_eval(series, ssa, trained);
    auto ev_initial = pointwise_eval(series, ssa, initial);
    const double l_trained =
        asymmetric_loss(ev_trained.truth, ev_trained.prediction, cfg.alpha_prime_loss).loss;
    const double l_initial =
        asymmetric_loss(ev_initial.truth, ev_initial.prediction, cfg.alpha_prime_loss).loss;
    CHECK(l_trained <= l_initial + 1e-12);
}

TEST_CASE("symmetric loss leaves symmetric residuals uncorrected on average") {
    const double sigma = 0.8;
    auto series = sinusoid(500, 24.0, 5.0, 6.0);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& v : series) v += noise(rng);
    auto ssa = ssa_fit(series, 48, RankPolicy::fixed(3));
    TrainingConfig cfg;
    cfg.alpha_prime_loss = 0.5;
    cfg.epochs = 60;
    cfg.batch_size = 32;
    cfg.seed = 21;
    cfg.phase_period_intervals = 24;
    cfg.early_stop_patience = 60;
    auto net = train_hybrid(series, ssa, cfg);
    auto ev = pointwise_eval(series, ssa, net);
    double mean = 0.0;
    for (double c : ev.corrections) mean += c;
    mean /= static_cast<double>(ev.corrections.size());
    CHECK(std::abs(mean) < 3.0 * sigma / std::sqrt(static_cast<double>(ev.corrections.size())) +
                               0.05);
}

TEST_CASE("high alpha' trains toward the upper quantile") {
    const double alpha = 0.9;
    auto series = sinusoid(500, 24.0, 5.0, 6.0);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> noise(0.0, 0.7);
    for (auto& v : series) v += noise(rng);
    auto ssa = ssa_fit(series, 48, RankPolicy::fixed(3));
    TrainingConfig cfg;
    cfg.alpha_prime_loss = alpha;
    cfg.epochs = 400;
    cfg.batch_size = 32;
    cfg.seed = 5;
    cfg.phase_period_intervals = 24;
    cfg.early_stop_patience = 400;
    auto net = train_hybrid(series, ssa, cfg);
    auto ev = pointwise_eval(series, ssa, net);
    // validation tail only, matching the training split
    const std::size_t n_val = ev.truth.size() / 10;
    std::size_t undershoots = 0;
    for (std::size_t i = ev.truth.size() - n_val; i < ev.truth.size(); ++i)
        if (ev.truth[i] > ev.prediction[i]) ++undershoots;
    const double frac = static_cast<double>(undershoots) / static_cast<double>(n_val);
    CHECK(frac <= (1.0 - alpha) + 0.05 + 0.05);
}

TEST_CASE("zero residuals train the corrector to near silence") {
    auto series = sinusoid(400, 16.0, 3.0, 4.0);
    // offset + sinusoid spans a rank-3 trajectory space
    auto ssa = ssa_fit(series, 32, RankPolicy::fixed(3));
    TrainingConfig cfg;
    cfg.epochs = 300;
    cfg.batch_size = 32;
    cfg.seed = 11;
    cfg.phase_period_intervals = 16;
    cfg.early_stop_patience = 300;
    auto net = train_hybrid(series, ssa, cfg);
    auto ev = pointwise_eval(series, ssa, net);
    for (double c : ev.corrections) CHECK(std::abs(c) < 1e-3);
}

TEST_CASE("predict_hybrid identities") {
    auto series = sinusoid(200, 20.0, 2.0, 3.0);
    auto ssa = ssa_fit(series, 40, RankPolicy::fixed(2));
    auto base = ssa_forecast(series.empty() ? ssa : ssa, series, 30, false);

    auto zero = zero_net();
    auto hybrid = predict_hybrid(ssa, zero, series, 30);
    for (std::size_t h = 0; h < hybrid.size(); ++h)
        CHECK(hybrid[h] == doctest::Approx(std::max(0.0, base[h])).epsilon(1e-12));

    auto biased = zero_net(0.75);
    auto shifted = predict_hybrid(ssa, biased, series, 30);
    for (std::size_t h = 0; h < shifted.size(); ++h)
        CHECK(shifted[h] == doctest::Approx(std::max(0.0, base[h] + 0.75)).epsilon(1e-12));
}

TEST_CASE("alpha' near 1 pushes the hybrid forecast above plain ssa") {
    // spiky trace: a periodic burst over a low base
    std::vector<double> series(480);
    std::mt19937_64 rng(31);
    std::poisson_distribution<int> base_noise(1.0);
    for (int t = 0; t < 480; ++t)
        series[static_cast<std::size_t>(t)] =
            base_noise(rng) + ((t % 48) < 4 ? 12.0 : 0.0);
    auto ssa = ssa_fit(series, 96, RankPolicy::energy(0.9));
    TrainingConfig cfg;
    cfg.alpha_prime_loss = 0.99;
    cfg.epochs = 60;
    cfg.batch_size = 64;
    cfg.seed = 2;
    cfg.phase_period_intervals = 48;
    cfg.early_stop_patience = 60;
    auto net = train_hybrid(series, ssa, cfg);

    auto plain = ssa_forecast(ssa, series, 60, true);
    auto hybrid = predict_hybrid(ssa, net, series, 60);
    double sum_plain = 0.0, sum_hybrid = 0.0;
    for (double v : plain) sum_plain += v;
    for (double v : hybrid) sum_hybrid += v;
    CHECK(sum_hybrid >= sum_plain - 1e-9);
}

TEST_CASE("baseline_predict hand cases") {
    CHECK(baseline_predict({1, 4, 2}, {1.0}, 3) == std::vector<double>{4, 4, 4});
    CHECK(baseline_predict({1, 4, 2}, {0.5}, 3) == std::vector<double>{2, 2, 2});
    CHECK(baseline_predict({0, 0}, {1.0}, 2) == std::vector<double>{0, 0});
    CHECK_THROWS_AS(baseline_predict({}, {1.0}, 2), std::invalid_argument);
}

TEST_CASE("accuracy_metrics hand cases") {
    auto zero = accuracy_metrics({1, 2}, {1, 2});
    CHECK(zero.mae == 0.0);
    CHECK(zero.rmse == 0.0);

    auto sym = accuracy_metrics({0, 0}, {3, -3});
    CHECK(sym.mae == doctest::Approx(3.0));
    CHECK(sym.rmse == doctest::Approx(3.0));

    auto skew = accuracy_metrics({0, 0}, {0, 4});
    CHECK(skew.mae == doctest::Approx(2.0));
    CHECK(skew.rmse == doctest::Approx(std::sqrt(8.0)));

    CHECK_THROWS_AS(accuracy_metrics({1}, {1, 2}), std::invalid_argument);
}

TEST_CASE("model save/load round-trip is exact") {
    auto series = sinusoid(300, 24.0, 2.0, 3.0);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> noise(0.0, 0.3);
    for (auto& v : series) v += noise(rng);
    auto ssa = ssa_fit(series, 36, RankPolicy::energy(0.9));
    TrainingConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 32;
    cfg.seed = 14;
    cfg.phase_period_intervals = 24;
    auto net = train_hybrid(series, ssa, cfg);

    const std::string path = "roundtrip_model.txt";
    save_hybrid_model(path, ssa, net);
    auto [ssa2, net2] = load_hybrid_model(path);
    std::remove(path.c_str());

    CHECK(ssa2.window_length == ssa.window_length);
    CHECK(ssa2.rank == ssa.rank);
    CHECK(ssa2.singular_values == ssa.singular_values);
    CHECK((ssa2.left_vectors.array() == ssa.left_vectors.array()).all());
    CHECK(ssa2.recurrence_coefficients == ssa.recurrence_coefficients);
    CHECK((net2.weights_1.array() == net.weights_1.array()).all());
    CHECK((net2.bias_1.array() == net.bias_1.array()).all());
    CHECK((net2.weights_2.array() == net.weights_2.array()).all());
    CHECK(net2.bias_2 == net.bias_2);
    CHECK(net2.feature_scale == net.feature_scale);
    CHECK(net2.phase_period_intervals == net.phase_period_intervals);

    CHECK(predict_hybrid(ssa2, net2, series, 25) == predict_hybrid(ssa, net, series, 25));

    CHECK_THROWS_AS(load_hybrid_model("no_such_model.txt"), std::runtime_error);
}
