#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "marsnet/matrix.hpp"

namespace marsnet::mars {

/// Positive is max(0, x - knot); Mirror is max(0, knot - x).
enum class HingeDirection { Positive, Mirror };

/// One hockey-stick function of a single predictor.
struct HingeTerm {
    std::size_t variable = 0;
    double knot = 0.0;
    HingeDirection direction = HingeDirection::Positive;

    friend bool operator==(const HingeTerm&, const HingeTerm&) = default;
};

/// Product of hinge factors on distinct variables.
struct BasisFunction {
    std::vector<HingeTerm> factors;

    std::size_t degree() const noexcept { return factors.size(); }
    bool uses_variable(std::size_t variable) const noexcept;

    friend bool operator==(const BasisFunction&, const BasisFunction&) = default;
};

struct Term {
    double coefficient = 0.0;
    BasisFunction basis;

    friend bool operator==(const Term&, const Term&) = default;
};

double hinge_eval(double x, double knot, HingeDirection direction);
double hinge_eval(const HingeTerm& hinge, std::span<const double> row);

/// Product of the factor values. Throws StructuralError if a factor indexes past the row.
double basis_eval(const BasisFunction& basis, std::span<const double> row);

/// Number of distinct (variable, knot) pairs over all hinge factors.
std::size_t count_knots(std::span<const Term> terms);

/// A fitted model: intercept plus weighted basis functions, in standardized units.
/// Immutable once built; evaluation is safe from many threads.
class MarsModel {
public:
    MarsModel() = default;
    MarsModel(std::size_t n_predictors, double intercept, std::vector<Term> terms,
              double fit_mse = 0.0, double fit_gcv = 0.0);

    std::size_t n_predictors() const noexcept { return n_predictors_; }
    double intercept() const noexcept { return intercept_; }
    const std::vector<Term>& terms() const noexcept { return terms_; }
    double fit_mse() const noexcept { return fit_mse_; }
    double fit_gcv() const noexcept { return fit_gcv_; }
    std::size_t knot_count() const noexcept { return knot_count_; }

    double predict(std::span<const double> row) const;
    std::vector<double> predict_batch(const Matrix& rows) const;

    /// Human-readable form such as `0.1 + 2*max(0, x3 - 0.25)`.
    std::string describe() const;

    std::string to_json() const;
    static MarsModel from_json(const std::string& text);

    friend bool operator==(const MarsModel&, const MarsModel&) = default;

private:
    std::size_t n_predictors_ = 0;
    double intercept_ = 0.0;
    std::vector<Term> terms_;
    double fit_mse_ = 0.0;
    double fit_gcv_ = 0.0;
    std::size_t knot_count_ = 0;
};

}  // namespace marsnet::mars
