#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "marsnet/least_squares.hpp"
#include "marsnet/mars_model.hpp"
#include "marsnet/matrix.hpp"
#include "marsnet/parallel.hpp"

namespace marsnet::mars {

struct MarsFitConfig {
    /// Forward-stage cap on non-intercept terms. A useful setting is three to four
    /// times the number of terms expected in the final model.
    std::size_t max_basis_functions = 15;
    /// Minimum number of observations between adjacent candidate knots.
    std::size_t min_span = 1;
    std::size_t max_interaction_degree = 1;
    /// Cost per knot in effective parameters; unset means 2 for additive models, 3 otherwise.
    std::optional<double> gcv_penalty;
    /// Forward stage stops when a step lowers the MSE by less than this fraction of the
    /// intercept-only MSE.
    double improvement_tolerance = 1e-12;
    Execution execution = Execution::Parallel;

    double penalty() const noexcept { return gcv_penalty ? *gcv_penalty : (max_interaction_degree > 1 ? 3.0 : 2.0); }
    void validate() const;
};

struct ForwardStep {
    std::size_t step = 0;
    std::size_t variable = 0;
    double knot = 0.0;
    std::size_t parent = 0;        // 0 is the intercept, k is the k-th term (1-based)
    std::size_t terms_added = 0;   // 2 for a hinge pair, 1 when a single slot was left
    double mse = 0.0;
};

struct ForwardTrace {
    double initial_mse = 0.0;
    std::vector<ForwardStep> steps;
};

struct PruneStep {
    std::size_t step = 0;
    std::size_t removed = 0;       // term id in the forward model, 1-based
    double mse = 0.0;
    double gcv = 0.0;
};

struct PruneTrace {
    double initial_mse = 0.0;
    double initial_gcv = 0.0;
    std::vector<PruneStep> steps;
    /// Number of leading removals applied to reach the GCV-minimal model.
    std::size_t selected = 0;
};

struct ForwardResult {
    MarsModel model;
    ForwardTrace trace;
};

struct PruneResult {
    MarsModel model;
    PruneTrace trace;
};

struct FitResult {
    MarsModel model;
    ForwardTrace forward;
    PruneTrace prune;
};

/// Eligible knots for a sorted column: distinct values, at least `min_span`
/// observations apart, never the largest value.
std::vector<double> candidate_knots(std::span<const double> sorted_column, std::size_t min_span);

/// mse / (1 - C/N)^2, or +infinity when C >= N.
double gcv_score(double mse, std::size_t n_samples, double n_effective_params);

/// GCV of a fitted subset: C = rank (intercept included) + penalty * knots.
double model_gcv(double mse, std::size_t n_samples, std::size_t rank, std::size_t knots, double penalty);

ForwardResult forward_pass(const Matrix& X, std::span<const double> y, const MarsFitConfig& config);
PruneResult backward_prune(const MarsModel& overfit, const Matrix& X, std::span<const double> y,
                           const MarsFitConfig& config);
FitResult fit(const Matrix& X, std::span<const double> y, const MarsFitConfig& config);

/// Least-squares refit of `terms` (coefficients ignored) with an intercept.
MarsModel refit(const std::vector<BasisFunction>& bases, const Matrix& X, std::span<const double> y,
                double penalty);

/// Evaluates one basis function over every row.
std::vector<double> basis_column(const BasisFunction& basis, const Matrix& X);

/// CSV renderings: `step,variable,knot,parent,terms_added,mse` and `step,removed,mse,gcv`.
std::string to_csv(const ForwardTrace& trace);
std::string to_csv(const PruneTrace& trace);

// Candidate-scan kernels, exposed for testing and benchmarking.

struct KnotCandidate {
    std::size_t parent = 0;
    std::size_t variable = 0;
    double knot = 0.0;
    HingeDirection direction = HingeDirection::Positive;  // ignored when pair is true
    bool pair = true;
};

struct ScanBest {
    double rss = 0.0;
    std::size_t index = 0;  // into the candidate list
    bool found = false;
};

/// Orders scan results: lower RSS, then lower variable, knot, parent; Positive before Mirror.
bool candidate_less(double rss_a, const KnotCandidate& a, double rss_b, const KnotCandidate& b);

/// `parents[k]` is the evaluated column of basis k (0 = intercept column of ones).
ScanBest scan_candidates(const OrthoBasis& basis, const Matrix& X,
                         std::span<const std::vector<double>> parents,
                         std::span<const KnotCandidate> candidates, Execution execution);

}  // namespace marsnet::mars
