#include <doctest.h>

#include <random>

#include "marsnet/least_squares.hpp"
#include "oracles.hpp"

using namespace marsnet;

TEST_CASE("intercept-only fit is the mean") {
    Matrix X(3, 1, 1.0);
    const std::vector<double> y{2, 4, 6};
    const auto r = least_squares_fit(X, y);
    REQUIRE(r.coefficients.size() == 1);
    CHECK(r.coefficients[0] == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(r.mse == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    CHECK(r.rank == 1);
}

TEST_CASE("exactly determined system has zero residual") {
    const auto X = Matrix::from_rows({{1.0, 2.0}, {1.0, -1.0}});
    const std::vector<double> y{5.0, -1.0};
    const auto r = least_squares_fit(X, y);
    CHECK(r.mse == doctest::Approx(0.0).scale(1.0).epsilon(1e-28));
    CHECK(r.coefficients[0] == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(r.coefficients[1] == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("random 50x4 system matches the normal equations") {
    std::mt19937_64 rng(2024);
    for (int rep = 0; rep < 10; ++rep) {
        const auto X = oracle::random_matrix(50, 4, rng, -1, 1);
        std::normal_distribution<double> g;
        std::vector<double> y(50);
        for (auto& v : y) v = g(rng);
        const auto r = least_squares_fit(X, y);
        const auto b = oracle::normal_equations(X, y);
        for (std::size_t k = 0; k < 4; ++k) CHECK(oracle::close_rel(r.coefficients[k], b[k], 1e-8));
        CHECK(oracle::close_rel(r.mse, oracle::mse_of(X, y, b), 1e-10));
    }
}

TEST_CASE("collinear columns are dropped in column order, not rejected") {
    std::mt19937_64 rng(9);
    auto X = oracle::random_matrix(30, 4, rng);
    for (std::size_t i = 0; i < 30; ++i) X(i, 2) = 2.0 * X(i, 0) - X(i, 1);  // dependent
    std::vector<double> y(30);
    for (std::size_t i = 0; i < 30; ++i) y[i] = X(i, 0) + 0.5 * X(i, 3) + 0.01 * static_cast<double>(i % 3);
    const auto r = least_squares_fit(X, y);
    CHECK(r.rank == 3);
    CHECK(r.dropped_columns == std::vector<std::size_t>{2});
    CHECK(r.coefficients[2] == 0.0);

    Matrix reduced(30, 3);
    for (std::size_t i = 0; i < 30; ++i) {
        reduced(i, 0) = X(i, 0);
        reduced(i, 1) = X(i, 1);
        reduced(i, 2) = X(i, 3);
    }
    const auto b = oracle::normal_equations(reduced, y);
    CHECK(oracle::close_rel(r.mse, oracle::mse_of(reduced, y, b), 1e-9));
}

TEST_CASE("all-zero column is dependent") {
    Matrix X(5, 2, 1.0);
    for (std::size_t i = 0; i < 5; ++i) X(i, 1) = 0.0;
    const std::vector<double> y{1, 2, 3, 4, 5};
    const auto r = least_squares_fit(X, y);
    CHECK(r.dropped_columns == std::vector<std::size_t>{1});
}

TEST_CASE("trial_rss equals the rss after the same appends, bit for bit") {
    std::mt19937_64 rng(77);
    const auto X = oracle::random_matrix(40, 6, rng);
    std::vector<double> y(40);
    for (std::size_t i = 0; i < 40; ++i) y[i] = X(i, 0) * X(i, 1) + X(i, 5);
    OrthoBasis base(y);
    for (std::size_t c = 0; c < 3; ++c) base.append(X.column(c));
    const auto c3 = X.column(3), c4 = X.column(4);
    const double trial = base.trial_rss({c3, c4});
    OrthoBasis grown = base;
    grown.append(c3);
    grown.append(c4);
    CHECK(trial == grown.rss());
    // And a full rebuild from scratch gives the same bits.
    OrthoBasis fresh(y);
    for (std::size_t c = 0; c < 5; ++c) fresh.append(X.column(c));
    CHECK(fresh.rss() == grown.rss());
}

TEST_CASE("shape errors") {
    Matrix X(3, 1, 1.0);
    const std::vector<double> y{1, 2};
    CHECK_THROWS_AS(least_squares_fit(X, y), StructuralError);
    CHECK_THROWS_AS(least_squares_fit(Matrix(0, 1), std::vector<double>{}), DomainError);
}
