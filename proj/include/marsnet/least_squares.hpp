#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "marsnet/matrix.hpp"

namespace marsnet {

/// Columns whose residual norm after orthogonalization falls below this fraction of
/// their original norm are treated as linearly dependent and dropped.
inline constexpr double kDependenceTolerance = 1e-8;

/// Least-squares fit built one column at a time by Gram-Schmidt with selective
/// re-orthogonalization. Columns are processed in append order; a column that is
/// (numerically) in the span of earlier ones is dropped and gets coefficient 0.
///
/// trial_rss() runs the same arithmetic as append() without mutating, so a trial
/// followed by the corresponding appends gives a bit-identical residual sum of squares.
class OrthoBasis {
public:
    explicit OrthoBasis(std::span<const double> target);

    std::size_t n_samples() const noexcept { return residual_.size(); }
    std::size_t n_columns() const noexcept { return kept_.size(); }
    std::size_t rank() const noexcept { return q_.size(); }

    /// Returns false when the column was dropped as dependent.
    bool append(std::span<const double> column);

    double rss() const noexcept { return rss_; }
    double mse() const noexcept { return n_samples() ? rss_ / static_cast<double>(n_samples()) : 0.0; }

    /// Residual sum of squares after appending `columns` in order.
    double trial_rss(std::initializer_list<std::span<const double>> columns) const;

    /// One coefficient per appended column (dependent columns get 0).
    std::vector<double> coefficients() const;
    /// Indices (in append order) of dropped columns.
    std::vector<std::size_t> dropped() const;
    const std::vector<double>& residual() const noexcept { return residual_; }

private:
    std::vector<std::vector<double>> q_;
    std::vector<std::vector<double>> r_;  // r_[k] = column k of R, length k+1
    std::vector<double> qty_;
    std::vector<bool> kept_;
    std::vector<double> residual_;
    double rss_ = 0.0;
};

struct LeastSquaresResult {
    std::vector<double> coefficients;
    double mse = 0.0;
    std::size_t rank = 0;
    std::vector<std::size_t> dropped_columns;
};

/// Minimizes sum((y - X b)^2)/N. Collinear columns are dropped in column order,
/// never reported as an error.
LeastSquaresResult least_squares_fit(const Matrix& design, std::span<const double> target);

}  // namespace marsnet
