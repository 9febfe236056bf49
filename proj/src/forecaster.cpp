#include "poolcast/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace poolcast {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXd hankel(const std::vector<double>& series, int window_length) {
    const int n = static_cast<int>(series.size());
    const int k = n - window_length + 1;
    Eigen::MatrixXd x(window_length, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < window_length; ++i)
            x(i, j) = series[static_cast<std::size_t>(i + j)];
    return x;
}

std::vector<double> diagonal_average(const Eigen::MatrixXd& x) {
    const int l = static_cast<int>(x.rows());
    const int k = static_cast<int>(x.cols());
    std::vector<double> out(static_cast<std::size_t>(l + k - 1), 0.0);
    std::vector<int> hits(out.size(), 0);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < l; ++i) {
            out[static_cast<std::size_t>(i + j)] += x(i, j);
            ++hits[static_cast<std::size_t>(i + j)];
        }
    for (std::size_t s = 0; s < out.size(); ++s) out[s] /= hits[s];
    return out;
}

double series_scale(const std::vector<double>& series) {
    double m = 0.0;
    for (double v : series) m = std::max(m, std::abs(v));
    return std::max(1.0, m);
}

void recent_stats(const std::vector<double>& series, std::size_t end, int window, double* mean,
                  double* max) {
    const std::size_t w = std::min<std::size_t>(end, static_cast<std::size_t>(window));
    if (w == 0) {
        *mean = 0.0;
        *max = 0.0;
        return;
    }
    double sum = 0.0, mx = series[end - w];
    for (std::size_t i = end - w; i < end; ++i) {
        sum += series[i];
        mx = std::max(mx, series[i]);
    }
    *mean = sum / static_cast<double>(w);
    *max = mx;
}

struct Sample {
    Eigen::VectorXd features;
    double base = 0.0;
    double target = 0.0;
};

double sample_loss(const ErrorCorrector& net, const std::vector<Sample>& samples,
                   double alpha_prime_loss) {
    std::vector<double> y, y_hat;
    y.reserve(samples.size());
    y_hat.reserve(samples.size());
    for (const auto& s : samples) {
        y.push_back(s.target);
        y_hat.push_back(s.base + net.forward(s.features));
    }
    return asymmetric_loss(y, y_hat, alpha_prime_loss).loss;
}

void write_hex(std::ostream& os, double v) {
    std::ostringstream tmp;
    tmp << std::hexfloat << v;
    os << tmp.str();
}

double read_hex(std::istream& is, const char* what) {
    std::string token;
    if (!(is >> token)) throw std::runtime_error(std::string("model file truncated at ") + what);
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0')
        throw std::runtime_error(std::string("model file: bad number for ") + what);
    return v;
}

}  // namespace

SsaModel ssa_fit(const std::vector<double>& series, int window_length, const RankPolicy& policy) {
    if (window_length < 2) throw std::invalid_argument("ssa_fit: window_length must be >= 2");
    if (series.size() < 2 * static_cast<std::size_t>(window_length))
        throw std::invalid_argument("ssa_fit: series must hold at least 2 * window_length points");

    const Eigen::MatrixXd x = hankel(series, window_length);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU);
    const Eigen::VectorXd sigma = svd.singularValues();

    int max_rank = 0;
    const double sigma_floor = 1e-12 * std::max(1.0, sigma.size() > 0 ? sigma(0) : 0.0);
    for (int i = 0; i < sigma.size(); ++i)
        if (sigma(i) > sigma_floor) ++max_rank;
    max_rank = std::max(max_rank, 1);

    int rank = 1;
    if (policy.kind == RankPolicy::Kind::fixed) {
        if (policy.fixed_rank < 1) throw std::invalid_argument("ssa_fit: fixed rank must be >= 1");
        rank = std::min(policy.fixed_rank, max_rank);
    } else {
        const double total = sigma.squaredNorm();
        double cum = 0.0;
        rank = max_rank;
        for (int i = 0; i < max_rank; ++i) {
            cum += sigma(i) * sigma(i);
            if (total <= 0.0 || cum >= policy.energy_threshold * total) {
                rank = i + 1;
                break;
            }
        }
    }

    SsaModel model;
    model.window_length = window_length;
    model.rank = rank;
    model.train_series_length = static_cast<int>(series.size());
    model.left_vectors = svd.matrixU().leftCols(rank);
    model.singular_values.assign(sigma.data(), sigma.data() + rank);

    // last-row verticality: the recurrence exists only when the retained
    // subspace is not orthogonal to e_L
    double nu2 = 0.0;
    for (int i = 0; i < rank; ++i) {
        const double pi = model.left_vectors(window_length - 1, i);
        nu2 += pi * pi;
    }
    if (nu2 >= 1.0 - 1e-9)
        throw std::runtime_error(
            "ssa_fit: degenerate recurrence (verticality ~ 1); adjust rank or window");

    Eigen::VectorXd r = Eigen::VectorXd::Zero(window_length - 1);
    for (int i = 0; i < rank; ++i) {
        const double pi = model.left_vectors(window_length - 1, i);
        r += pi * model.left_vectors.col(i).head(window_length - 1);
    }
    r /= (1.0 - nu2);
    model.recurrence_coefficients.assign(r.data(), r.data() + r.size());
    return model;
}

std::vector<double> ssa_reconstruct(const SsaModel& model, const std::vector<double>& series) {
    if (series.size() < static_cast<std::size_t>(model.window_length))
        throw std::invalid_argument("ssa_reconstruct: series shorter than the window");
    const Eigen::MatrixXd x = hankel(series, model.window_length);
    const Eigen::MatrixXd projected = model.left_vectors * (model.left_vectors.transpose() * x);
    return diagonal_average(projected);
}

std::vector<double> ssa_forecast(const SsaModel& model, const std::vector<double>& history,
                                 int horizon, bool clamp_non_negative) {
    if (horizon < 0) throw std::invalid_argument("ssa_forecast: negative horizon");
    const std::size_t lag = static_cast<std::size_t>(model.window_length - 1);
    std::vector<double> window;
    if (history.size() >= static_cast<std::size_t>(model.window_length)) {
        auto recon = ssa_reconstruct(model, history);
        window.assign(recon.end() - static_cast<std::ptrdiff_t>(lag), recon.end());
    } else if (history.size() >= lag) {
        window.assign(history.end() - static_cast<std::ptrdiff_t>(lag), history.end());
    } else {
        throw std::invalid_argument("ssa_forecast: history shorter than window_length - 1");
    }

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    for (int h = 0; h < horizon; ++h) {
        double v = 0.0;
        for (std::size_t i = 0; i < lag; ++i) v += model.recurrence_coefficients[i] * window[i];
        if (clamp_non_negative) v = std::max(0.0, v);
        out.push_back(v);
        window.erase(window.begin());
        window.push_back(v);
    }
    return out;
}

AsymmetricLoss asymmetric_loss(const std::vector<double>& y, const std::vector<double>& y_hat,
                               double alpha_prime_loss) {
    if (y.size() != y_hat.size() || y.empty())
        throw std::invalid_argument("asymmetric_loss: mismatched or empty inputs");
    if (alpha_prime_loss < 0.0 || alpha_prime_loss > 1.0)
        throw std::invalid_argument("asymmetric_loss: alpha' must lie in [0, 1]");
    AsymmetricLoss out;
    out.gradient.resize(y.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double delta = y[i] - y_hat[i];
        if (delta > 0.0) {
            out.loss += alpha_prime_loss * delta;
            out.gradient[i] = -alpha_prime_loss * inv_n;
        } else if (delta < 0.0) {
            out.loss += (1.0 - alpha_prime_loss) * (-delta);
            out.gradient[i] = (1.0 - alpha_prime_loss) * inv_n;
        }
    }
    out.loss *= inv_n;
    return out;
}

double ErrorCorrector::forward(const Eigen::VectorXd& features) const {
    const Eigen::VectorXd hidden = (weights_1 * features + bias_1).cwiseMax(0.0);
    return weights_2.dot(hidden) + bias_2;
}

CorrectorGradients corrector_gradient(const ErrorCorrector& net, const Eigen::VectorXd& features,
                                      double base_prediction, double target,
                                      double alpha_prime_loss) {
    const Eigen::VectorXd pre = net.weights_1 * features + net.bias_1;
    const Eigen::VectorXd hidden = pre.cwiseMax(0.0);
    const double y_hat = base_prediction + net.weights_2.dot(hidden) + net.bias_2;

    const double delta = target - y_hat;
    double dl_dy = 0.0;
    if (delta > 0.0)
        dl_dy = -alpha_prime_loss;
    else if (delta < 0.0)
        dl_dy = 1.0 - alpha_prime_loss;

    CorrectorGradients g;
    g.weights_2 = dl_dy * hidden.transpose();
    g.bias_2 = dl_dy;
    Eigen::VectorXd d_hidden = dl_dy * net.weights_2.transpose();
    for (int i = 0; i < d_hidden.size(); ++i)
        if (pre(i) <= 0.0) d_hidden(i) = 0.0;  // ReLU'(0) := 0
    g.weights_1 = d_hidden * features.transpose();
    g.bias_1 = d_hidden;
    return g;
}

Eigen::VectorXd corrector_features(double ssa_prediction, std::int64_t time_index,
                                   double recent_mean, double recent_max,
                                   const ErrorCorrector& net) {
    const double period = static_cast<double>(net.phase_period_intervals);
    const double phase =
        2.0 * kPi * static_cast<double>(time_index % net.phase_period_intervals) / period;
    Eigen::VectorXd f(5);
    f << ssa_prediction / net.feature_scale, std::sin(phase), std::cos(phase),
        recent_mean / net.feature_scale, recent_max / net.feature_scale;
    return f;
}

ErrorCorrector train_hybrid(const std::vector<double>& series, const SsaModel& ssa,
                            const TrainingConfig& config) {
    if (config.alpha_prime_loss < 0.0 || config.alpha_prime_loss > 1.0)
        throw std::invalid_argument("train_hybrid: alpha' must lie in [0, 1]");
    if (config.epochs < 1 || config.batch_size < 1 || config.learning_rate <= 0.0 ||
        config.hidden_dim < 1 || config.phase_period_intervals < 1 || config.recent_window < 1)
        throw std::invalid_argument("train_hybrid: bad training configuration");

    ErrorCorrector net;
    net.hidden_dim = config.hidden_dim;
    net.phase_period_intervals = config.phase_period_intervals;
    net.recent_window = config.recent_window;
    net.feature_scale = series_scale(series);

    const int lag = ssa.window_length - 1;
    const auto recon = ssa_reconstruct(ssa, series);
    const std::size_t first =
        static_cast<std::size_t>(std::max(ssa.window_length, config.recent_window));
    if (series.size() <= first + 1)
        throw std::invalid_argument("train_hybrid: series too short to build training samples");

    std::vector<Sample> samples;
    for (std::size_t t = first; t < series.size(); ++t) {
        double base = 0.0;
        for (int i = 0; i < lag; ++i)
            base += ssa.recurrence_coefficients[static_cast<std::size_t>(i)] *
                    recon[t - static_cast<std::size_t>(lag) + static_cast<std::size_t>(i)];
        double mean = 0.0, mx = 0.0;
        recent_stats(series, t, config.recent_window, &mean, &mx);
        Sample s;
        s.base = base;
        s.target = series[t];
        s.features =
            corrector_features(base, static_cast<std::int64_t>(t), mean, mx, net);
        samples.push_back(std::move(s));
    }

    // time-ordered split: the validation tail guards against overfitting the
    // most recent regime
    const std::size_t n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(config.validation_fraction *
                                                 static_cast<double>(samples.size()))));
    if (n_val >= samples.size())
        throw std::invalid_argument("train_hybrid: not enough samples for the validation split");
    const std::vector<Sample> val(samples.end() - static_cast<std::ptrdiff_t>(n_val),
                                  samples.end());
    samples.resize(samples.size() - n_val);

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> init(-0.05, 0.05);
    net.weights_1 = Eigen::MatrixXd::NullaryExpr(net.hidden_dim, net.input_dim,
                                                 [&]() { return init(rng); });
    net.bias_1 = Eigen::VectorXd::NullaryExpr(net.hidden_dim, [&]() { return init(rng); });
    net.weights_2 = Eigen::RowVectorXd::NullaryExpr(net.hidden_dim, [&]() { return init(rng); });
    net.bias_2 = init(rng);

    ErrorCorrector best = net;
    double best_val = sample_loss(net, val, config.alpha_prime_loss);
    int stale_epochs = 0;

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            Eigen::MatrixXd gw1 = Eigen::MatrixXd::Zero(net.hidden_dim, net.input_dim);
            Eigen::VectorXd gb1 = Eigen::VectorXd::Zero(net.hidden_dim);
            Eigen::RowVectorXd gw2 = Eigen::RowVectorXd::Zero(net.hidden_dim);
            double gb2 = 0.0;
            for (std::size_t i = start; i < stop; ++i) {
                const Sample& s = samples[order[i]];
                auto g = corrector_gradient(net, s.features, s.base, s.target,
                                            config.alpha_prime_loss);
                gw1 += g.weights_1;
                gb1 += g.bias_1;
                gw2 += g.weights_2;
                gb2 += g.bias_2;
            }
            const double scale = config.learning_rate / static_cast<double>(stop - start);
            net.weights_1 -= scale * gw1;
            net.bias_1 -= scale * gb1;
            net.weights_2 -= scale * gw2;
            net.bias_2 -= scale * gb2;
            if (!net.weights_1.allFinite() || !net.bias_1.allFinite() ||
                !net.weights_2.allFinite() || !std::isfinite(net.bias_2)) {
                std::ostringstream msg;
                msg << "train_hybrid: non-finite parameters at epoch " << epoch << ", batch "
                    << start / static_cast<std::size_t>(config.batch_size);
                throw std::runtime_error(msg.str());
            }
        }
        const double val_loss = sample_loss(net, val, config.alpha_prime_loss);
        if (!std::isfinite(val_loss)) {
            std::ostringstream msg;
            msg << "train_hybrid: non-finite validation loss at epoch " << epoch;
            throw std::runtime_error(msg.str());
        }
        if (val_loss < best_val - 1e-12) {
            best_val = val_loss;
            best = net;
            stale_epochs = 0;
        } else if (++stale_epochs >= config.early_stop_patience) {
            break;
        }
    }
    return best;
}

std::vector<double> predict_hybrid(const SsaModel& ssa, const ErrorCorrector& corrector,
                                   const std::vector<double>& history, int horizon) {
    const auto base = ssa_forecast(ssa, history, horizon, false);
    std::vector<double> extended = history;
    std::vector<double> out;
    out.reserve(base.size());
    for (int h = 0; h < horizon; ++h) {
        double mean = 0.0, mx = 0.0;
        recent_stats(extended, extended.size(), corrector.recent_window, &mean, &mx);
        const auto feat = corrector_features(
            base[static_cast<std::size_t>(h)],
            static_cast<std::int64_t>(history.size()) + h, mean, mx, corrector);
        const double v =
            std::max(0.0, base[static_cast<std::size_t>(h)] + corrector.forward(feat));
        out.push_back(v);
        extended.push_back(v);
    }
    return out;
}

std::vector<double> baseline_predict(const std::vector<double>& train_series,
                                     const BaselineConfig& config, int horizon) {
    if (train_series.empty()) throw std::invalid_argument("baseline_predict: empty series");
    if (horizon < 0) throw std::invalid_argument("baseline_predict: negative horizon");
    const double level = config.gamma * *std::max_element(train_series.begin(),
                                                          train_series.end());
    return std::vector<double>(static_cast<std::size_t>(horizon), level);
}

AccuracyMetrics accuracy_metrics(const std::vector<double>& y, const std::vector<double>& y_hat) {
    if (y.size() != y_hat.size() || y.empty())
        throw std::invalid_argument("accuracy_metrics: mismatched or empty inputs");
    AccuracyMetrics m;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = y[i] - y_hat[i];
        m.mae += std::abs(e);
        m.rmse += e * e;
    }
    m.mae /= static_cast<double>(y.size());
    m.rmse = std::sqrt(m.rmse / static_cast<double>(y.size()));
    return m;
}

void save_hybrid_model(const std::string& path, const SsaModel& ssa,
                       const ErrorCorrector& corrector) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_hybrid_model: cannot open " + path);
    os << "poolcast-hybrid-model 1\n";
    os << "ssa " << ssa.window_length << ' ' << ssa.rank << ' ' << ssa.train_series_length << '\n';
    for (double v : ssa.singular_values) {
        write_hex(os, v);
        os << ' ';
    }
    os << '\n';
    for (int i = 0; i < ssa.left_vectors.rows(); ++i)
        for (int j = 0; j < ssa.left_vectors.cols(); ++j) {
            write_hex(os, ssa.left_vectors(i, j));
            os << ' ';
        }
    os << '\n';
    for (double v : ssa.recurrence_coefficients) {
        write_hex(os, v);
        os << ' ';
    }
    os << '\n';
    os << "net " << corrector.input_dim << ' ' << corrector.hidden_dim << ' '
       << corrector.phase_period_intervals << ' ' << corrector.recent_window << '\n';
    for (int i = 0; i < corrector.weights_1.rows(); ++i)
        for (int j = 0; j < corrector.weights_1.cols(); ++j) {
            write_hex(os, corrector.weights_1(i, j));
            os << ' ';
        }
    os << '\n';
    for (int i = 0; i < corrector.bias_1.size(); ++i) {
        write_hex(os, corrector.bias_1(i));
        os << ' ';
    }
    os << '\n';
    for (int i = 0; i < corrector.weights_2.size(); ++i) {
        write_hex(os, corrector.weights_2(i));
        os << ' ';
    }
    os << '\n';
    write_hex(os, corrector.bias_2);
    os << ' ';
    write_hex(os, corrector.feature_scale);
    os << '\n';
    if (!os) throw std::runtime_error("save_hybrid_model: write failed for " + path);
}

std::pair<SsaModel, ErrorCorrector> load_hybrid_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_hybrid_model: cannot open " + path);
    std::string magic;
    int version = 0;
    is >> magic >> version;
    if (magic != "poolcast-hybrid-model" || version != 1)
        throw std::runtime_error("load_hybrid_model: unrecognized format in " + path);

    std::string tag;
    SsaModel ssa;
    is >> tag >> ssa.window_length >> ssa.rank >> ssa.train_series_length;
    if (tag != "ssa" || !is || ssa.window_length < 2 || ssa.rank < 1)
        throw std::runtime_error("load_hybrid_model: bad ssa header in " + path);
    ssa.singular_values.resize(static_cast<std::size_t>(ssa.rank));
    for (double& v : ssa.singular_values) v = read_hex(is, "singular value");
    ssa.left_vectors.resize(ssa.window_length, ssa.rank);
    for (int i = 0; i < ssa.window_length; ++i)
        for (int j = 0; j < ssa.rank; ++j) ssa.left_vectors(i, j) = read_hex(is, "left vector");
    ssa.recurrence_coefficients.resize(static_cast<std::size_t>(ssa.window_length - 1));
    for (double& v : ssa.recurrence_coefficients) v = read_hex(is, "recurrence coefficient");

    ErrorCorrector net;
    is >> tag >> net.input_dim >> net.hidden_dim >> net.phase_period_intervals >>
        net.recent_window;
    if (tag != "net" || !is || net.input_dim < 1 || net.hidden_dim < 1)
        throw std::runtime_error("load_hybrid_model: bad net header in " + path);
    net.weights_1.resize(net.hidden_dim, net.input_dim);
    for (int i = 0; i < net.hidden_dim; ++i)
        for (int j = 0; j < net.input_dim; ++j) net.weights_1(i, j) = read_hex(is, "w1");
    net.bias_1.resize(net.hidden_dim);
    for (int i = 0; i < net.hidden_dim; ++i) net.bias_1(i) = read_hex(is, "b1");
    net.weights_2.resize(net.hidden_dim);
    for (int i = 0; i < net.hidden_dim; ++i) net.weights_2(i) = read_hex(is, "w2");
    net.bias_2 = read_hex(is, "b2");
    net.feature_scale = read_hex(is, "scale");
    return {std::move(ssa), std::move(net)};
}

}  // namespace poolcast
