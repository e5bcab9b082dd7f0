#include "marsnet/least_squares.hpp"

#include <cmath>
#include <optional>

namespace marsnet {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct Orthogonalized {
    std::vector<double> q;        // unit vector
    std::vector<double> r;        // projections onto basis, then the pivot
};

// Classical Gram-Schmidt against `basis`, repeated once when the first pass cancels
// more than half the norm ("twice is enough"). Returns nothing for a dependent column.
std::optional<Orthogonalized> orthogonalize(std::span<const double> column,
                                            std::span<const std::vector<double>* const> basis) {
    Orthogonalized out;
    out.q.assign(column.begin(), column.end());
    out.r.assign(basis.size() + 1, 0.0);
    const double norm0 = dot(out.q, out.q);
    if (!(norm0 > 0.0)) return std::nullopt;

    double norm = norm0;
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> c(basis.size());
        for (std::size_t k = 0; k < basis.size(); ++k) c[k] = dot(*basis[k], out.q);
        for (std::size_t k = 0; k < basis.size(); ++k) {
            const auto& qk = *basis[k];
            for (std::size_t i = 0; i < out.q.size(); ++i) out.q[i] -= c[k] * qk[i];
            out.r[k] += c[k];
        }
        const double before = norm;
        norm = dot(out.q, out.q);
        if (norm > 0.5 * before) break;
    }
    if (!(norm > kDependenceTolerance * kDependenceTolerance * norm0)) return std::nullopt;

    const double len = std::sqrt(norm);
    for (auto& v : out.q) v /= len;
    out.r.back() = len;
    return out;
}

// Removes the component along unit vector q; returns the projection coefficient.
double deflate(std::vector<double>& residual, std::span<const double> q) {
    const double c = dot(q, residual);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= c * q[i];
    return c;
}

}  // namespace

OrthoBasis::OrthoBasis(std::span<const double> target)
    : residual_(target.begin(), target.end()), rss_(dot(target, target)) {}

bool OrthoBasis::append(std::span<const double> column) {
    if (column.size() != residual_.size()) throw StructuralError("column length mismatch");
    std::vector<const std::vector<double>*> basis;
    basis.reserve(q_.size());
    for (const auto& q : q_) basis.push_back(&q);

    auto o = orthogonalize(column, basis);
    if (!o) {
        kept_.push_back(false);
        return false;
    }
    qty_.push_back(deflate(residual_, o->q));
    rss_ = dot(residual_, residual_);
    q_.push_back(std::move(o->q));
    r_.push_back(std::move(o->r));
    kept_.push_back(true);
    return true;
}

double OrthoBasis::trial_rss(std::initializer_list<std::span<const double>> columns) const {
    std::vector<const std::vector<double>*> basis;
    basis.reserve(q_.size() + columns.size());
    for (const auto& q : q_) basis.push_back(&q);

    std::vector<double> residual = residual_;
    double rss = rss_;
    std::vector<std::vector<double>> extra;
    extra.reserve(columns.size());
    for (auto column : columns) {
        if (column.size() != residual.size()) throw StructuralError("column length mismatch");
        auto o = orthogonalize(column, basis);
        if (!o) continue;
        deflate(residual, o->q);
        rss = dot(residual, residual);
        extra.push_back(std::move(o->q));
        basis.push_back(&extra.back());
    }
    return rss;
}

std::vector<double> OrthoBasis::coefficients() const {
    // Back substitution R b = Q^T y over the kept columns.
    const std::size_t k = q_.size();
    std::vector<double> b(k, 0.0);
    for (std::size_t j = k; j-- > 0;) {
        double s = qty_[j];
        for (std::size_t m = j + 1; m < k; ++m) s -= r_[m][j] * b[m];
        b[j] = s / r_[j][j];
    }
    std::vector<double> out(kept_.size(), 0.0);
    for (std::size_t i = 0, j = 0; i < kept_.size(); ++i)
        if (kept_[i]) out[i] = b[j++];
    return out;
}

std::vector<std::size_t> OrthoBasis::dropped() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < kept_.size(); ++i)
        if (!kept_[i]) out.push_back(i);
    return out;
}

LeastSquaresResult least_squares_fit(const Matrix& design, std::span<const double> target) {
    if (design.rows() != target.size()) throw StructuralError("design rows must match target length");
    if (design.rows() == 0) throw DomainError("least squares on empty data");
    OrthoBasis basis(target);
    for (std::size_t c = 0; c < design.cols(); ++c) basis.append(design.column(c));
    return {basis.coefficients(), basis.mse(), basis.rank(), basis.dropped()};
}

}  // namespace marsnet
