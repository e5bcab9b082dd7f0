#include <doctest.h>

#include <cmath>
#include <sstream>

#include "marsnet/errors.hpp"
#include "marsnet/timeseries.hpp"

using namespace marsnet;
using namespace marsnet::timeseries;

namespace {

MonthlySeries parse(const std::string& text) {
    std::istringstream in(text);
    return parse_csv(in);
}

std::string long_csv(std::size_t years) {
    std::string s = "year,month,value\n";
    for (std::size_t t = 0; t < years * 12; ++t)
        s += std::to_string(2000 + t / 12) + "," + std::to_string(t % 12 + 1) + "," + std::to_string(t) + ".5\n";
    return s;
}

std::string wide_csv(std::size_t years) {
    std::string s = "Year,Jan,Feb,Mar,Apr,May,Jun,Jul,Aug,Sep,Oct,Nov,Dec\n";
    for (std::size_t y = 0; y < years; ++y) {
        s += std::to_string(2000 + y);
        for (std::size_t m = 0; m < 12; ++m) s += "," + std::to_string(y * 12 + m) + ".5";
        s += "\n";
    }
    return s;
}

std::size_t error_line(const std::string& text) {
    try {
        parse(text);
    } catch (const DataError& e) {
        return e.line();
    }
    return 0;
}

MonthlySeries counting(std::size_t n) {
    MonthlySeries s{1950, 1, {}};
    for (std::size_t t = 0; t < n; ++t) s.values.push_back(static_cast<double>(t));
    return s;
}

}  // namespace

TEST_CASE("long and wide CSV parse to the same series") {
    const auto a = parse(long_csv(3));
    const auto b = parse(wide_csv(3));
    CHECK(a == b);
    CHECK(a.size() == 36);
    CHECK(a.start_year == 2000);
    CHECK(a.start_month == 1);
    CHECK(a.values[13] == 13.5);
}

TEST_CASE("CSV round trip") {
    auto s = synth_monsoon(3, 2, 0.3);
    CHECK(parse(to_csv(s)) == s);
}

TEST_CASE("long CSV may start mid-year") {
    std::string text = "year,month,value\n";
    for (int t = 0; t < 30; ++t) text += std::to_string(1990 + (t + 6) / 12) + "," + std::to_string((t + 6) % 12 + 1) + ",1\n";
    const auto s = parse(text);
    CHECK(s.start_month == 7);
    CHECK(s.month_at(0) == 7);
    CHECK(s.month_at(6) == 1);
}

TEST_CASE("CSV errors carry the offending line") {
    auto text = long_csv(3);
    const auto pos = text.find("2001,2,13.5");
    CHECK(error_line(text.substr(0, pos) + "2001,2,NaN" + text.substr(pos + 11)) == 15);
    CHECK(error_line(text.substr(0, pos) + "2001,2,abc" + text.substr(pos + 11)) == 15);
    CHECK(error_line(text.substr(0, pos) + "2001,3,13.5" + text.substr(pos + 11)) == 15);
    CHECK(error_line(text.substr(0, pos) + "2001,2" + text.substr(pos + 11)) == 15);
    CHECK(error_line("date,value\n") == 1);
    CHECK_THROWS_AS(parse(long_csv(1)), DataError);
    CHECK_THROWS_AS(parse(""), DataError);
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), DataError);
}

TEST_CASE("global standardizer statistics") {
    MonthlySeries s{2000, 1, {0, 2, 4, 100}};
    const auto z = fit_standardizer(s, {0, 3});
    CHECK(z.mean() == doctest::Approx(2.0));
    CHECK(z.stddev() == doctest::Approx(std::sqrt(8.0 / 3.0)));
    CHECK(z.transform(2.0) == doctest::Approx(0.0));
}

TEST_CASE("constant training segment is rejected") {
    MonthlySeries s{2000, 1, std::vector<double>(30, 5.0)};
    CHECK_THROWS_AS(fit_standardizer(s, {0, 24}), DomainError);
    CHECK_THROWS_AS(fit_standardizer(s, {0, 24}, Standardization::PerMonth), DomainError);
}

TEST_CASE("standardization round trip") {
    for (auto mode : {Standardization::Global, Standardization::PerMonth}) {
        const auto s = synth_monsoon(10, 3, 0.3);
        const auto z = fit_standardizer(s, {0, 96}, mode);
        const auto v = standardize(s, z);
        std::vector<int> months;
        for (std::size_t t = 0; t < s.size(); ++t) months.push_back(s.month_at(t));
        const auto back = inverse_standardize(v, months, z);
        for (std::size_t t = 0; t < s.size(); ++t) CHECK(std::abs(back[t] - s.values[t]) <= 1e-12 * std::max(1.0, s.values[t]));
    }
}

TEST_CASE("per-month standardizer uses each calendar month separately") {
    const auto s = synth_monsoon(10, 3, 0.3);
    const auto z = fit_standardizer(s, {0, 120}, Standardization::PerMonth);
    double sum = 0.0;
    for (std::size_t y = 0; y < 10; ++y) sum += s.values[y * 12 + 6];
    CHECK(z.mean(7) == doctest::Approx(sum / 10.0));
    const auto v = standardize(s, z);
    double zsum = 0.0;
    for (std::size_t y = 0; y < 10; ++y) zsum += v[y * 12 + 6];
    CHECK(std::abs(zsum) < 1e-10);
}

TEST_CASE("lag embedding of 0..23 with 12 lags") {
    const auto s = counting(24);
    const auto d = lag_embed(s.values, 12);
    REQUIRE(d.rows() == 12);
    CHECK(d.X.cols() == 12);
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(d.y[i] == static_cast<double>(12 + i));
        CHECK(d.target_position[i] == 12 + i);
        for (std::size_t j = 0; j < 12; ++j) CHECK(d.X(i, j) == static_cast<double>(i + j));
    }
}

TEST_CASE("lag embedding row count, month cycle and reconstruction") {
    for (std::size_t n : {24u, 37u, 100u})
        for (std::size_t p : {1u, 6u, 12u, 23u}) {
            const auto s = counting(n);
            const auto d = lag_embed(s.values, p, 4);
            REQUIRE(d.rows() == n - p);
            for (std::size_t i = 0; i < d.rows(); ++i) {
                CHECK(d.month[i] == static_cast<int>((3 + p + i) % 12) + 1);
                CHECK(d.y[i] == s.values[p + i]);
            }
            // First row holds the opening lags; targets hold the rest.
            std::vector<double> rebuilt(d.X.row(0).begin(), d.X.row(0).end());
            rebuilt.insert(rebuilt.end(), d.y.begin(), d.y.end());
            CHECK(rebuilt == s.values);
        }
    CHECK_THROWS(lag_embed(counting(24).values, 0));
    CHECK_THROWS(lag_embed(counting(12).values, 12));
}

TEST_CASE("chronological split arithmetic") {
    const auto s = counting(87 * 12);
    auto d = lag_embed(s.values, 12);
    const auto [train, test] = chrono_split(d, 40);
    CHECK(train == Range{0, 40 * 12 - 12});
    CHECK(test.size() == 47 * 12);
    CHECK(d.target_position[test.begin] == 480);
    CHECK(d.train == train);
    CHECK(d.test == test);
    for (std::size_t i = train.begin; i < train.end; ++i) CHECK(d.target_position[i] < 480);
}

TEST_CASE("two-year series splits one year each way with six lags") {
    const auto s = counting(24);
    auto d = lag_embed(s.values, 6);
    const auto [train, test] = chrono_split(d, 1);
    CHECK(train.size() == 6);
    CHECK(test.size() == 12);
    auto d12 = lag_embed(s.values, 12);
    CHECK_THROWS_AS(chrono_split(d12, 1), DomainError);
    CHECK_THROWS_AS(chrono_split(d, 0), DomainError);
    CHECK_THROWS_AS(chrono_split(d, 2), DomainError);
}

TEST_CASE("rmse") {
    const std::vector<double> a{1, 2, 3}, b{1, 2, 3}, c{2, 3, 4};
    CHECK(rmse(a, b) == 0.0);
    CHECK(rmse(a, c) == doctest::Approx(1.0));
    CHECK(rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}) == doctest::Approx(std::sqrt(12.5)));
    CHECK_THROWS_AS(rmse(a, std::vector<double>{1}), StructuralError);
    CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), DomainError);
}

TEST_CASE("climatology averages training targets per month") {
    const auto s = synth_monsoon(5, 8, 0.3);
    auto d = lag_embed(s.values, 12);
    chrono_split(d, 3);
    const auto means = climatology(d);
    double july = 0.0;
    for (std::size_t y = 1; y < 3; ++y) july += s.values[y * 12 + 6];
    CHECK(means[6] == doctest::Approx(july / 2.0));
    const std::vector<int> months{7, 1};
    const auto pred = climatology_predict(means, months);
    CHECK(pred[0] == means[6]);
    CHECK(pred[1] == means[0]);
}

TEST_CASE("synthetic monsoon generator") {
    const auto a = synth_monsoon(20, 11, 0.3);
    const auto b = synth_monsoon(20, 11, 0.3);
    const auto c = synth_monsoon(20, 12, 0.3);
    CHECK(a == b);
    CHECK(a.values != c.values);
    CHECK(a.size() == 240);
    CHECK(a.start_year == 1900);
    for (double v : a.values) CHECK(v > 0.0);

    // Without noise the series is template times modulation.
    const auto clean = synth_monsoon(2, 1, 0.0);
    for (std::size_t t = 0; t < 24; ++t)
        CHECK(clean.values[t] == doctest::Approx(monsoon_template()[t % 12] * monsoon_modulation(t)));

    // Monsoon months are far wetter than the dry season.
    double wet = 0.0, dry = 0.0;
    for (std::size_t y = 0; y < 20; ++y) {
        wet += a.values[y * 12 + 6];
        dry += a.values[y * 12 + 0];
    }
    CHECK(wet > 10.0 * dry);
}
