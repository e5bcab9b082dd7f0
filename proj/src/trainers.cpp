#include "marsnet/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include <boost/math/tools/minima.hpp>

#include "marsnet/format.hpp"

namespace marsnet::neural {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool all_finite(std::span<const double> a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

std::vector<double> along(std::span<const double> w, double step, std::span<const double> d) {
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] + step * d[i];
    return out;
}

void check_start(Objective& f, const std::vector<double>& w, const StopCriteria& stop) {
    if (w.size() != f.size()) throw StructuralError("initial weights have wrong length");
    if (stop.epochs < 1) throw DomainError("epochs must be at least 1");
}

// Returns true (and sets the report) when a stopping floor is reached before an epoch.
bool floor_reached(double loss, std::span<const double> gradient, const StopCriteria& stop, TrainReport& report) {
    if (norm(gradient) <= stop.gradient_floor) {
        report.termination = Termination::GradientFloor;
        return true;
    }
    if (loss <= stop.mse_floor) {
        report.termination = Termination::MseFloor;
        return true;
    }
    return false;
}

struct LineResult {
    double step = 0.0;
    double value = 0.0;
    bool improved = false;
};

// Minimizes phi(a) = f(w + a d) over a > 0: expand or shrink until a bracket
// [lo, hi] holds an interior point below phi(0), then Brent's golden-section /
// parabolic search on the bracket.
LineResult line_search(Objective& f, std::span<const double> w, std::span<const double> d, double phi0,
                       double guess, const CgConfig& config, std::size_t& evaluations) {
    auto phi = [&](double a) {
        ++evaluations;
        const double v = f.value(along(w, a, d));
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    constexpr double kGrow = 1.618033988749895;
    constexpr int kMaxBracket = 40;

    double lo = 0.0, mid = guess, fmid = phi(mid);
    int tries = 0;
    while (!(fmid < phi0)) {
        if (++tries > kMaxBracket) return {};
        mid *= 0.1;
        fmid = phi(mid);
    }
    double hi = mid * (1.0 + kGrow), fhi = phi(hi);
    while (fhi < fmid) {
        if (++tries > kMaxBracket) return {mid, fmid, true};
        lo = mid;
        mid = hi;
        fmid = fhi;
        hi = mid + kGrow * (mid - lo);
        fhi = phi(hi);
    }

    // Search in t in [0, 1] so the tolerance is relative to the bracket.
    const int bits = static_cast<int>(std::ceil(1.0 - std::log2(config.line_tolerance)));
    std::uintmax_t iterations = config.line_max_evaluations;
    const double width = hi - lo;
    const auto [t, ft] = boost::math::tools::brent_find_minima(
        [&](double s) { return phi(lo + s * width); }, 0.0, 1.0, bits, iterations);
    if (ft <= fmid) return {lo + t * width, ft, true};
    return {mid, fmid, true};
}

}  // namespace

NetworkObjective::NetworkObjective(MlpNetwork net, Matrix X, Matrix Y, Execution execution)
    : net_(std::move(net)), X_(std::move(X)), Y_(std::move(Y)), execution_(execution) {
    if (X_.rows() != Y_.rows()) throw StructuralError("inputs and targets have different row counts");
}

double NetworkObjective::value(std::span<const double> w) {
    net_.set_params(w);
    return mlp_loss(net_, X_, Y_, execution_);
}

double NetworkObjective::value_and_gradient(std::span<const double> w, std::span<double> gradient) {
    net_.set_params(w);
    return loss_and_gradient(net_, X_, Y_, gradient, execution_);
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::EpochLimit: return "epoch_limit";
        case Termination::GradientFloor: return "gradient_floor";
        case Termination::MseFloor: return "mse_floor";
        case Termination::Stalled: return "stalled";
    }
    return "unknown";
}

std::string TrainReport::to_csv() const {
    std::ostringstream os;
    os << "epoch,mse\n";
    for (std::size_t e = 0; e < mse.size(); ++e) os << e + 1 << ',' << format_double(mse[e]) << '\n';
    return os.str();
}

void GdConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw DomainError("learning rate must be >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw DomainError("momentum must lie in [0, 1)");
}

TrainReport gd_minimize(Objective& f, std::vector<double>& w, const GdConfig& config, const Observer& observe) {
    config.validate();
    check_start(f, w, config.stop);
    TrainReport report;
    std::vector<double> g(w.size()), step(w.size(), 0.0);
    double loss = f.value_and_gradient(w, g);
    ++report.gradient_evaluations;
    if (!std::isfinite(loss)) throw NumericalError("non-finite loss at start of gradient descent", 0);

    for (std::size_t epoch = 1; epoch <= config.stop.epochs; ++epoch) {
        if (floor_reached(loss, g, config.stop, report)) return report;
        for (std::size_t i = 0; i < w.size(); ++i) {
            step[i] = -config.learning_rate * g[i] + config.momentum * step[i];
            w[i] += step[i];
        }
        loss = f.value_and_gradient(w, g);
        ++report.gradient_evaluations;
        if (!std::isfinite(loss) || !all_finite(w)) throw NumericalError("gradient descent diverged", epoch);
        report.mse.push_back(loss);
        report.accepted.push_back(true);
        report.epochs = epoch;
        if (observe) observe({epoch, w, {}, loss, true, 0.0});
    }
    report.termination = Termination::EpochLimit;
    return report;
}

TrainReport cg_minimize(Objective& f, std::vector<double>& w, const CgConfig& config, const Observer& observe) {
    check_start(f, w, config.stop);
    TrainReport report;
    const std::size_t n = w.size();
    std::vector<double> g(n), g_new(n), d(n);
    double loss = f.value_and_gradient(w, g);
    ++report.gradient_evaluations;
    if (!std::isfinite(loss)) throw NumericalError("non-finite loss at start of conjugate gradient", 0);
    for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];

    std::size_t since_restart = 0;
    double last_step = 0.0;
    for (std::size_t epoch = 1; epoch <= config.stop.epochs; ++epoch) {
        if (floor_reached(loss, g, config.stop, report)) return report;

        bool steepest = since_restart == 0;
        if (dot(d, g) >= 0.0) {
            for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
            since_restart = 0;
            steepest = true;
        }
        double guess = last_step > 0.0 ? last_step : 1.0 / norm(d);
        LineResult line = line_search(f, w, d, loss, guess, config, report.function_evaluations);
        if (!line.improved && !steepest) {
            for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
            since_restart = 0;
            guess = 1.0 / norm(d);
            line = line_search(f, w, d, loss, guess, config, report.function_evaluations);
        }
        if (!line.improved) {
            report.termination = Termination::Stalled;
            return report;
        }
        last_step = line.step;
        for (std::size_t i = 0; i < n; ++i) w[i] += line.step * d[i];
        loss = f.value_and_gradient(w, g_new);
        ++report.gradient_evaluations;
        if (!std::isfinite(loss) || !all_finite(w)) throw NumericalError("conjugate gradient diverged", epoch);
        report.mse.push_back(loss);
        report.accepted.push_back(true);
        report.epochs = epoch;
        if (observe) observe({epoch, w, d, loss, true, 0.0});

        if (++since_restart >= n) {
            for (std::size_t i = 0; i < n; ++i) d[i] = -g_new[i];
            since_restart = 0;
        } else {
            const double gg = dot(g, g);
            double beta = config.beta == BetaVariant::FletcherReeves
                              ? dot(g_new, g_new) / gg
                              : (dot(g_new, g_new) - dot(g_new, g)) / gg;
            if (config.beta == BetaVariant::PolakRibiere) beta = std::max(beta, 0.0);
            for (std::size_t i = 0; i < n; ++i) d[i] = -g_new[i] + beta * d[i];
        }
        std::swap(g, g_new);
    }
    report.termination = Termination::EpochLimit;
    return report;
}

TrainReport scg_minimize(Objective& f, std::vector<double>& w, const ScgConfig& config, const Observer& observe) {
    check_start(f, w, config.stop);
    if (!(config.sigma > 0.0) || !(config.lambda_initial > 0.0)) throw DomainError("SCG sigma and lambda must be > 0");
    TrainReport report;
    const std::size_t n = w.size();
    std::vector<double> g(n), g_probe(n), g_trial(n);

    double loss = f.value_and_gradient(w, g);
    ++report.gradient_evaluations;
    if (!std::isfinite(loss)) throw NumericalError("non-finite loss at start of scaled conjugate gradient", 0);

    ScgState s;
    s.residual.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.residual[i] = -g[i];
    s.direction = s.residual;
    s.lambda = config.lambda_initial;

    std::size_t successes = 0;
    for (std::size_t epoch = 1; epoch <= config.stop.epochs; ++epoch) {
        if (floor_reached(loss, g, config.stop, report)) return report;

        auto& p = s.direction;
        auto& r = s.residual;
        double mu = dot(p, r);
        if (mu <= 0.0) {
            p = r;
            mu = dot(p, r);
        }
        const double kappa = dot(p, p);

        // Second-order information along p from a gradient difference. Evaluated every
        // epoch; after a rejected step it reproduces the previous value exactly.
        const double sigma = config.sigma / std::sqrt(kappa);
        f.value_and_gradient(along(w, sigma, p), g_probe);
        ++report.gradient_evaluations;
        double theta = 0.0;
        for (std::size_t i = 0; i < n; ++i) theta += p[i] * (g_probe[i] - g[i]);
        theta /= sigma;

        s.curvature = theta + s.lambda * kappa;
        if (s.curvature <= 0.0) {
            // Make the scaled Hessian positive definite along p.
            s.lambda_bar = 2.0 * (s.lambda - s.curvature / kappa);
            s.curvature = -s.curvature + s.lambda * kappa;
            s.lambda = s.lambda_bar;
        }
        const double alpha = mu / s.curvature;

        const std::vector<double> used = p;
        const auto trial = along(w, alpha, p);
        const double trial_loss = f.value_and_gradient(trial, g_trial);
        ++report.gradient_evaluations;
        s.comparison = std::isfinite(trial_loss) ? 2.0 * s.curvature * (loss - trial_loss) / (mu * mu) : -1.0;

        s.success = s.comparison >= 0.0;
        if (s.success) {
            w = trial;
            loss = trial_loss;
            g = g_trial;
            const std::vector<double> r_old = r;
            for (std::size_t i = 0; i < n; ++i) r[i] = -g[i];
            s.lambda_bar = 0.0;
            if (++successes % n == 0) {
                p = r;
            } else {
                const double beta = (dot(r, r) - dot(r, r_old)) / mu;
                for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
            }
            if (s.comparison > 0.75) s.lambda = std::max(0.5 * s.lambda, std::numeric_limits<double>::min());
        } else {
            s.lambda_bar = s.lambda;
        }
        if (s.comparison < 0.25) s.lambda = std::min(4.0 * s.lambda, config.lambda_max);

        report.mse.push_back(loss);
        report.accepted.push_back(s.success);
        report.epochs = epoch;
        if (observe) observe({epoch, w, used, loss, s.success, s.lambda});
    }
    report.termination = Termination::EpochLimit;
    return report;
}

namespace {

template <typename Minimizer, typename Config>
TrainReport train_network(MlpNetwork& net, const Matrix& X, std::span<const double> y, const Config& config,
                          Minimizer minimize) {
    NetworkObjective objective(net, X, as_targets(y));
    std::vector<double> w(net.params().begin(), net.params().end());
    TrainReport report = minimize(objective, w, config, Observer{});
    net.set_params(w);
    return report;
}

}  // namespace

TrainReport gd_train(MlpNetwork& net, const Matrix& X, std::span<const double> y, const GdConfig& config) {
    return train_network(net, X, y, config, gd_minimize);
}

TrainReport cg_train(MlpNetwork& net, const Matrix& X, std::span<const double> y, const CgConfig& config) {
    return train_network(net, X, y, config, cg_minimize);
}

TrainReport scg_train(MlpNetwork& net, const Matrix& X, std::span<const double> y, const ScgConfig& config) {
    return train_network(net, X, y, config, scg_minimize);
}

}  // namespace marsnet::neural
