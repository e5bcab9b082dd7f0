#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "marsnet/matrix.hpp"

namespace marsnet::timeseries {

/// Consecutive monthly amounts in physical units.
struct MonthlySeries {
    int start_year = 0;
    int start_month = 1;  // 1-12
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    /// Calendar month (1-12) of the value at `position`.
    int month_at(std::size_t position) const noexcept {
        return static_cast<int>((static_cast<std::size_t>(start_month - 1) + position) % 12) + 1;
    }
    friend bool operator==(const MonthlySeries&, const MonthlySeries&) = default;
};

/// Half-open row or position range.
struct Range {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const noexcept { return end - begin; }
    bool empty() const noexcept { return end == begin; }
    friend bool operator==(const Range&, const Range&) = default;
};

/// Reads `year,month,value` (long) or `year,jan,...,dec` (wide) CSV; the header decides.
MonthlySeries load_csv(const std::filesystem::path& path);
MonthlySeries parse_csv(std::istream& in);
/// Long-format rendering with shortest round-trip values.
std::string to_csv(const MonthlySeries& series);

enum class Standardization { Global, PerMonth };

/// z-score statistics from a training segment (population standard deviation).
class Standardizer {
public:
    Standardizer() = default;
    static Standardizer fit(const MonthlySeries& series, Range positions, Standardization mode);

    Standardization mode() const noexcept { return mode_; }
    double mean(int month = 1) const { return mean_[slot(month)]; }
    double stddev(int month = 1) const { return std_[slot(month)]; }

    double transform(double value, int month = 1) const { return (value - mean(month)) / stddev(month); }
    double inverse(double z, int month = 1) const { return z * stddev(month) + mean(month); }

    friend bool operator==(const Standardizer&, const Standardizer&) = default;

private:
    std::size_t slot(int month) const { return mode_ == Standardization::Global ? 0 : static_cast<std::size_t>(month - 1); }
    Standardization mode_ = Standardization::Global;
    std::array<double, 12> mean_{};
    std::array<double, 12> std_{};
};

Standardizer fit_standardizer(const MonthlySeries& series, Range train_positions,
                              Standardization mode = Standardization::Global);
std::vector<double> standardize(const MonthlySeries& series, const Standardizer& z);
/// `months[i]` is the calendar month of `values[i]`.
std::vector<double> inverse_standardize(std::span<const double> values, std::span<const int> months,
                                        const Standardizer& z);

/// Supervised pairs: row i holds the n_lags values before target i.
struct LagDataset {
    Matrix X;
    std::vector<double> y;
    std::vector<int> month;                   // calendar month of each target
    std::vector<std::size_t> target_position; // index of each target in the series
    std::size_t n_lags = 0;
    Range train;
    Range test;

    std::size_t rows() const noexcept { return y.size(); }
    Matrix train_X() const { return X.slice_rows(train.begin, train.end); }
    Matrix test_X() const { return X.slice_rows(test.begin, test.end); }
    std::span<const double> train_y() const { return std::span(y).subspan(train.begin, train.size()); }
    std::span<const double> test_y() const { return std::span(y).subspan(test.begin, test.size()); }
};

LagDataset lag_embed(std::span<const double> values, std::size_t n_lags = 12, int start_month = 1);

/// Rows whose target lies in the first `train_years` years train; the rest test.
/// Also stores the ranges in the dataset.
std::pair<Range, Range> chrono_split(LagDataset& data, std::size_t train_years);

double rmse(std::span<const double> predicted, std::span<const double> actual);

/// Per-calendar-month mean of the training targets.
std::array<double, 12> climatology(const LagDataset& data);
std::vector<double> climatology_predict(const std::array<double, 12>& means, std::span<const int> months);

/// Mean monthly amounts (mm) of the synthetic generator, January first.
const std::array<double, 12>& monsoon_template();
/// Slow multiplicative amplitude modulation at absolute month index t.
double monsoon_modulation(std::size_t t);
/// Lag-one autocorrelation of the log-noise anomalies.
inline constexpr double kNoisePersistence = 0.7;
/// Seasonal template times modulation times mean-one log-normal noise whose
/// log anomalies follow an AR(1) process with unit marginal variance.
MonthlySeries synth_monsoon(std::size_t years, std::uint64_t seed, double noise_sigma, int start_year = 1900);

}  // namespace marsnet::timeseries
