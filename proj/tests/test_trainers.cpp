#include <doctest.h>

#include <cmath>
#include <random>

#include "marsnet/trainers.hpp"
#include "oracles.hpp"

using namespace marsnet;
using namespace marsnet::neural;

namespace {

// E(w) = (w - 3)^2
class Parabola final : public Objective {
public:
    std::size_t size() const override { return 1; }
    double value(std::span<const double> w) override { return (w[0] - 3.0) * (w[0] - 3.0); }
    double value_and_gradient(std::span<const double> w, std::span<double> g) override {
        g[0] = 2.0 * (w[0] - 3.0);
        return value(w);
    }
};

// Banana-shaped valley; its curvature changes fast enough to make SCG reject steps.
class Rosenbrock final : public Objective {
public:
    std::size_t size() const override { return 2; }
    double value(std::span<const double> w) override {
        return 100.0 * std::pow(w[1] - w[0] * w[0], 2) + std::pow(1.0 - w[0], 2);
    }
    double value_and_gradient(std::span<const double> w, std::span<double> g) override {
        g[0] = -400.0 * w[0] * (w[1] - w[0] * w[0]) - 2.0 * (1.0 - w[0]);
        g[1] = 200.0 * (w[1] - w[0] * w[0]);
        return value(w);
    }
};

struct LinearProblem {
    Matrix X;
    Matrix Y;
    MlpNetwork net;
};

// Linear network (no hidden layer) on least squares: a quadratic in its 30 parameters.
LinearProblem linear_problem(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    LinearProblem p{oracle::random_matrix(100, 29, rng, -1, 1), Matrix(100, 1),
                    MlpNetwork({29, 1}, Activation::LogSigmoid, Activation::Linear)};
    std::normal_distribution<double> g;
    for (std::size_t i = 0; i < 100; ++i) {
        double v = 0.3;
        for (std::size_t j = 0; j < 29; ++j) v += (static_cast<double>(j % 5) - 2.0) * 0.2 * p.X(i, j);
        p.Y(i, 0) = v + 0.1 * g(rng);
    }
    return p;
}

std::vector<double> least_squares_weights(const LinearProblem& p) {
    Matrix D(p.X.rows(), 30);
    for (std::size_t i = 0; i < p.X.rows(); ++i) {
        for (std::size_t j = 0; j < 29; ++j) D(i, j) = p.X(i, j);
        D(i, 29) = 1.0;
    }
    return oracle::normal_equations(D, p.Y.column(0));
}

double gradient_norm(Objective& f, std::span<const double> w) {
    std::vector<double> g(f.size());
    f.value_and_gradient(w, g);
    double s = 0.0;
    for (double v : g) s += v * v;
    return std::sqrt(s);
}

StopCriteria epochs(std::size_t n) {
    StopCriteria s;
    s.epochs = n;
    return s;
}

}  // namespace

TEST_CASE("gradient descent: one epoch without momentum is one plain step") {
    auto net = init_weights({3, 4, 1}, 1);
    std::mt19937_64 rng(1);
    const auto X = oracle::random_matrix(20, 3, rng);
    std::vector<double> y(20);
    for (std::size_t i = 0; i < 20; ++i) y[i] = X(i, 0) - X(i, 2);
    const auto g = backprop_gradient(net, X, y);
    const std::vector<double> w0(net.params().begin(), net.params().end());
    const auto report = gd_train(net, X, y, {0.1, 0.0, epochs(1)});
    CHECK(report.epochs == 1);
    for (std::size_t k = 0; k < w0.size(); ++k) CHECK(net.params()[k] == doctest::Approx(w0[k] - 0.1 * g[k]).epsilon(1e-15));
}

TEST_CASE("gradient descent on a parabola contracts by 0.8 per step") {
    Parabola f;
    std::vector<double> w{0.0};
    std::vector<double> path;
    gd_minimize(f, w, {0.1, 0.0, epochs(20)}, [&](const IterationInfo& it) { path.push_back(it.weights[0]); });
    REQUIRE(path.size() == 20);
    for (std::size_t k = 0; k < path.size(); ++k)
        CHECK(path[k] - 3.0 == doctest::Approx(-3.0 * std::pow(0.8, static_cast<double>(k + 1))).epsilon(1e-12));
}

TEST_CASE("gradient descent momentum follows dw(n) = -lr*g + momentum*dw(n-1)") {
    Parabola f;
    std::vector<double> w{0.0};
    std::vector<double> path;
    gd_minimize(f, w, {0.1, 0.5, epochs(5)}, [&](const IterationInfo& it) { path.push_back(it.weights[0]); });
    double x = 0.0, dw = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
        dw = -0.1 * 2.0 * (x - 3.0) + 0.5 * dw;
        x += dw;
        CHECK(path[k] == doctest::Approx(x).epsilon(1e-14));
    }
}

TEST_CASE("gradient descent with zero learning rate changes nothing") {
    auto net = init_weights({2, 3, 1}, 4);
    const auto before = net;
    std::mt19937_64 rng(4);
    const auto X = oracle::random_matrix(15, 2, rng);
    const std::vector<double> y(15, 0.5);
    const auto report = gd_train(net, X, y, {0.0, 0.9, epochs(10)});
    CHECK(net == before);
    for (double m : report.mse) CHECK(m == report.mse.front());
}

TEST_CASE("gradient descent divergence reports the epoch") {
    Parabola f;
    std::vector<double> w{0.0};
    try {
        gd_minimize(f, w, {10.0, 0.0, epochs(1000)});
        FAIL("expected divergence");
    } catch (const NumericalError& e) {
        CHECK(e.epoch() > 1);
        CHECK(e.epoch() < 1000);
    }
}

TEST_CASE("gradient descent with a small step decreases the loss") {
    auto net = init_weights({4, 5, 1}, 6);
    std::mt19937_64 rng(6);
    const auto X = oracle::random_matrix(40, 4, rng, -1, 1);
    std::vector<double> y(40);
    for (std::size_t i = 0; i < 40; ++i) y[i] = std::sin(X(i, 0)) + X(i, 3);
    const auto report = gd_train(net, X, y, {0.05, 0.0, epochs(50)});
    for (std::size_t k = 1; k < report.mse.size(); ++k) CHECK(report.mse[k] <= report.mse[k - 1]);
}

TEST_CASE("GdConfig validation") {
    Parabola f;
    std::vector<double> w{0.0};
    CHECK_THROWS_AS(gd_minimize(f, w, {-1.0, 0.0, epochs(1)}), DomainError);
    CHECK_THROWS_AS(gd_minimize(f, w, {0.1, 1.0, epochs(1)}), DomainError);
    CHECK_THROWS_AS(gd_minimize(f, w, {0.1, 0.0, epochs(0)}), DomainError);
}

TEST_CASE("conjugate gradient terminates on a 30-parameter quadratic") {
    for (auto beta : {BetaVariant::FletcherReeves, BetaVariant::PolakRibiere}) {
        auto p = linear_problem(17);
        NetworkObjective f(p.net, p.X, p.Y);
        std::vector<double> w(30, 0.0);
        CgConfig cfg;
        cfg.beta = beta;
        cfg.stop = epochs(32);
        cg_minimize(f, w, cfg);
        CHECK(gradient_norm(f, w) <= 1e-6);
        const auto exact = least_squares_weights(p);
        for (std::size_t k = 0; k < 30; ++k) CHECK(std::abs(w[k] - exact[k]) < 1e-6);
    }
}

TEST_CASE("conjugate gradient: first direction is steepest descent and directions are conjugate") {
    auto p = linear_problem(5);
    NetworkObjective f(p.net, p.X, p.Y);
    std::vector<double> w(30, 0.1);
    std::vector<double> g0(30);
    f.value_and_gradient(w, g0);

    std::vector<std::vector<double>> dirs;
    CgConfig cfg;
    cfg.stop = epochs(12);
    cg_minimize(f, w, cfg, [&](const IterationInfo& it) { dirs.emplace_back(it.direction.begin(), it.direction.end()); });
    for (std::size_t k = 0; k < 30; ++k) CHECK(dirs[0][k] == -g0[k]);

    // Hessian of the MSE: (2/N) sum x x^T with x = [inputs, 1].
    auto hess = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.X.rows(); ++i) {
            double xa = a[29], xb = b[29];
            for (std::size_t j = 0; j < 29; ++j) {
                xa += p.X(i, j) * a[j];
                xb += p.X(i, j) * b[j];
            }
            s += xa * xb;
        }
        return 2.0 * s / static_cast<double>(p.X.rows());
    };
    for (std::size_t i = 0; i < dirs.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const double scale = std::sqrt(hess(dirs[i], dirs[i]) * hess(dirs[j], dirs[j]));
            CHECK(std::abs(hess(dirs[i], dirs[j])) <= 1e-6 * scale);
        }
}

TEST_CASE("conjugate gradient stops at once on a zero gradient") {
    Parabola f;
    std::vector<double> w{3.0};
    const auto r = cg_minimize(f, w, CgConfig{});
    CHECK(r.termination == Termination::GradientFloor);
    CHECK(r.epochs == 0);
    CHECK(r.mse.empty());
}

TEST_CASE("scaled conjugate gradient matches CG on a quadratic") {
    auto p = linear_problem(23);
    NetworkObjective f(p.net, p.X, p.Y);
    std::vector<double> w_cg(30, 0.0), w_scg(30, 0.0);
    CgConfig cg;
    cg.stop = epochs(32);
    cg_minimize(f, w_cg, cg);
    ScgConfig scg;
    scg.stop = epochs(32);
    const auto r = scg_minimize(f, w_scg, scg);
    CHECK(gradient_norm(f, w_scg) <= 1e-6);
    for (std::size_t k = 0; k < 30; ++k) CHECK(std::abs(w_cg[k] - w_scg[k]) < 1e-6);
    CHECK(r.gradient_evaluations == 1 + 2 * r.epochs);
    CHECK(r.function_evaluations == 0);
}

TEST_CASE("scaled conjugate gradient: rejected steps keep weights and raise lambda") {
    Rosenbrock f;
    std::vector<double> w{-1.2, 1.0};
    std::vector<double> prev_w = w;
    double prev_lambda = ScgConfig{}.lambda_initial;
    std::size_t rejected = 0;
    ScgConfig cfg;
    cfg.stop = epochs(300);
    const auto r = scg_minimize(f, w, cfg, [&](const IterationInfo& it) {
        CHECK(it.lambda >= 0.0);
        if (!it.accepted) {
            ++rejected;
            CHECK(it.weights[0] == prev_w[0]);
            CHECK(it.weights[1] == prev_w[1]);
            CHECK(it.lambda > prev_lambda);
        }
        prev_w.assign(it.weights.begin(), it.weights.end());
        prev_lambda = it.lambda;
    });
    CHECK(rejected > 0);
    for (std::size_t k = 1; k < r.mse.size(); ++k) CHECK(r.mse[k] <= r.mse[k - 1]);
    CHECK(r.gradient_evaluations == 1 + 2 * r.epochs);
    CHECK(f.value(w) < 1e-6);
}

TEST_CASE("trainers are deterministic on a network") {
    std::mt19937_64 rng(9);
    const auto X = oracle::random_matrix(60, 4, rng, -1, 1);
    std::vector<double> y(60);
    for (std::size_t i = 0; i < 60; ++i) y[i] = std::tanh(X(i, 0) * X(i, 1)) + 0.3 * X(i, 2);
    auto a = init_weights({4, 6, 6, 1}, 3), b = a;
    ScgConfig cfg;
    cfg.stop = epochs(50);
    const auto ra = scg_train(a, X, y, cfg);
    const auto rb = scg_train(b, X, y, cfg);
    CHECK(a == b);
    CHECK(ra.mse == rb.mse);
    CHECK(ra.to_csv() == rb.to_csv());
    CHECK(ra.mse.size() == 50);
    CHECK(ra.mse.back() < ra.mse.front());
}

TEST_CASE("train report CSV") {
    TrainReport r;
    r.mse = {0.5, 0.25};
    CHECK(r.to_csv() == "epoch,mse\n1,0.5\n2,0.25\n");
}
