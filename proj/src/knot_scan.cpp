// Candidate knot scan: the inner loop of the forward pass. Each candidate is scored
// by the residual sum of squares after appending its hinge column(s) to the current
// least-squares basis. The scores do not depend on evaluation order, so the parallel
// kernel only needs an order-independent reduction to match the serial one exactly.

#include <tuple>
#include <vector>

#include "marsnet/mars_fit.hpp"

namespace marsnet::mars {
namespace {

double score(const OrthoBasis& basis, const Matrix& X, std::span<const std::vector<double>> parents,
             const KnotCandidate& c, std::vector<double>& pos, std::vector<double>& mir) {
    const auto& parent = parents[c.parent];
    for (std::size_t i = 0; i < X.rows(); ++i) {
        const double x = X(i, c.variable);
        pos[i] = parent[i] * hinge_eval(x, c.knot, HingeDirection::Positive);
        mir[i] = parent[i] * hinge_eval(x, c.knot, HingeDirection::Mirror);
    }
    if (c.pair) return basis.trial_rss({pos, mir});
    return basis.trial_rss({c.direction == HingeDirection::Positive ? pos : mir});
}

void keep_better(ScanBest& best, double rss, std::size_t index, std::span<const KnotCandidate> candidates) {
    if (!best.found || candidate_less(rss, candidates[index], best.rss, candidates[best.index]))
        best = {rss, index, true};
}

ScanBest scan_serial(const OrthoBasis& basis, const Matrix& X, std::span<const std::vector<double>> parents,
                     std::span<const KnotCandidate> candidates) {
    ScanBest best;
    std::vector<double> pos(X.rows()), mir(X.rows());
    for (std::size_t k = 0; k < candidates.size(); ++k)
        keep_better(best, score(basis, X, parents, candidates[k], pos, mir), k, candidates);
    return best;
}

ScanBest scan_parallel(const OrthoBasis& basis, const Matrix& X, std::span<const std::vector<double>> parents,
                       std::span<const KnotCandidate> candidates) {
    ScanBest best;
    const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel
    {
        ScanBest local;
        std::vector<double> pos(X.rows()), mir(X.rows());
#pragma omp for schedule(dynamic, 16) nowait
        for (std::ptrdiff_t k = 0; k < n; ++k) {
            const auto idx = static_cast<std::size_t>(k);
            keep_better(local, score(basis, X, parents, candidates[idx], pos, mir), idx, candidates);
        }
#pragma omp critical(marsnet_knot_scan)
        if (local.found) keep_better(best, local.rss, local.index, candidates);
    }
    return best;
}

}  // namespace

bool candidate_less(double rss_a, const KnotCandidate& a, double rss_b, const KnotCandidate& b) {
    auto key = [](double rss, const KnotCandidate& c) {
        return std::tuple(rss, c.variable, c.knot, c.parent, c.direction == HingeDirection::Mirror);
    };
    return key(rss_a, a) < key(rss_b, b);
}

ScanBest scan_candidates(const OrthoBasis& basis, const Matrix& X, std::span<const std::vector<double>> parents,
                         std::span<const KnotCandidate> candidates, Execution execution) {
    for (const auto& c : candidates)
        if (c.parent >= parents.size() || c.variable >= X.cols())
            throw StructuralError("knot candidate references unknown basis or variable");
    return execution == Execution::Parallel ? scan_parallel(basis, X, parents, candidates)
                                            : scan_serial(basis, X, parents, candidates);
}

}  // namespace marsnet::mars
