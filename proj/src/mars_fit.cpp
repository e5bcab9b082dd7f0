#include "marsnet/mars_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include "marsnet/format.hpp"

namespace marsnet::mars {
namespace {

void check_data(const Matrix& X, std::span<const double> y) {
    if (X.rows() == 0 || X.cols() == 0) throw DomainError("MARS fit on empty data");
    if (y.size() != X.rows()) throw StructuralError("target length must equal row count");
    for (double v : X.data())
        if (!std::isfinite(v)) throw DomainError("non-finite predictor value");
    for (double v : y)
        if (!std::isfinite(v)) throw DomainError("non-finite target value");
}

std::size_t count_knots(std::span<const BasisFunction> bases) {
    std::set<std::pair<std::size_t, double>> knots;
    for (const auto& b : bases)
        for (const auto& f : b.factors) knots.emplace(f.variable, f.knot);
    return knots.size();
}

BasisFunction extend(const BasisFunction& parent, std::size_t variable, double knot, HingeDirection dir) {
    BasisFunction b = parent;
    b.factors.push_back({variable, knot, dir});
    return b;
}

MarsModel assemble(const OrthoBasis& basis, const std::vector<BasisFunction>& bases, std::size_t n_predictors,
                   double penalty) {
    const auto coef = basis.coefficients();
    std::vector<Term> terms;
    terms.reserve(bases.size());
    for (std::size_t k = 0; k < bases.size(); ++k) terms.push_back({coef[k + 1], bases[k]});
    const double mse = basis.mse();
    const double gcv = model_gcv(mse, basis.n_samples(), basis.rank(), count_knots(bases), penalty);
    return MarsModel(n_predictors, coef[0], std::move(terms), mse, gcv);
}

OrthoBasis build_basis(std::span<const double> y, std::span<const std::vector<double>> columns,
                       std::span<const std::size_t> active) {
    OrthoBasis basis(y);
    basis.append(std::vector<double>(y.size(), 1.0));
    for (auto k : active) basis.append(columns[k]);
    return basis;
}

}  // namespace

void MarsFitConfig::validate() const {
    if (max_basis_functions < 1) throw DomainError("max_basis_functions must be at least 1");
    if (min_span < 1) throw DomainError("min_span must be at least 1");
    if (max_interaction_degree < 1) throw DomainError("max_interaction_degree must be at least 1");
    if (gcv_penalty && !(*gcv_penalty >= 0.0)) throw DomainError("gcv_penalty must be non-negative");
    if (!(improvement_tolerance >= 0.0)) throw DomainError("improvement_tolerance must be non-negative");
}

std::vector<double> candidate_knots(std::span<const double> sorted_column, std::size_t min_span) {
    if (sorted_column.empty()) throw DomainError("candidate_knots: empty column");
    if (min_span < 1) throw DomainError("candidate_knots: min_span must be at least 1");
    for (std::size_t i = 0; i < sorted_column.size(); ++i) {
        if (!std::isfinite(sorted_column[i])) throw DomainError("candidate_knots: non-finite value");
        if (i > 0 && sorted_column[i] < sorted_column[i - 1])
            throw DomainError("candidate_knots: column is not sorted");
    }
    const double largest = sorted_column.back();
    std::vector<double> knots;
    std::size_t last = 0;
    for (std::size_t i = 0; i < sorted_column.size(); ++i) {
        if (i > 0 && sorted_column[i] == sorted_column[i - 1]) continue;
        if (sorted_column[i] == largest) break;
        if (knots.empty() || i - last >= min_span) {
            knots.push_back(sorted_column[i]);
            last = i;
        }
    }
    return knots;
}

double gcv_score(double mse, std::size_t n_samples, double n_effective_params) {
    if (n_samples == 0) throw DomainError("gcv_score: no samples");
    const double n = static_cast<double>(n_samples);
    if (n_effective_params >= n) return std::numeric_limits<double>::infinity();
    const double d = 1.0 - n_effective_params / n;
    return mse / (d * d);
}

double model_gcv(double mse, std::size_t n_samples, std::size_t rank, std::size_t knots, double penalty) {
    return gcv_score(mse, n_samples, static_cast<double>(rank) + penalty * static_cast<double>(knots));
}

std::vector<double> basis_column(const BasisFunction& basis, const Matrix& X) {
    std::vector<double> col(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) col[i] = basis_eval(basis, X.row(i));
    return col;
}

ForwardResult forward_pass(const Matrix& X, std::span<const double> y, const MarsFitConfig& config) {
    config.validate();
    check_data(X, y);
    const std::size_t n = X.rows();
    const std::size_t p = X.cols();

    std::vector<std::vector<double>> sorted(p);
    for (std::size_t v = 0; v < p; ++v) {
        sorted[v] = X.column(v);
        std::sort(sorted[v].begin(), sorted[v].end());
    }

    OrthoBasis basis(y);
    std::vector<std::vector<double>> columns{std::vector<double>(n, 1.0)};
    basis.append(columns.front());
    std::vector<BasisFunction> bases;

    ForwardTrace trace;
    trace.initial_mse = basis.mse();

    std::vector<KnotCandidate> candidates;
    std::vector<double> subset;
    while (bases.size() < config.max_basis_functions) {
        const bool pair = config.max_basis_functions - bases.size() >= 2;

        candidates.clear();
        for (std::size_t parent = 0; parent <= bases.size(); ++parent) {
            const BasisFunction* pb = parent ? &bases[parent - 1] : nullptr;
            if (pb && pb->degree() >= config.max_interaction_degree) continue;
            for (std::size_t v = 0; v < p; ++v) {
                if (pb && pb->uses_variable(v)) continue;
                std::span<const double> values = sorted[v];
                if (pb) {
                    subset.clear();
                    for (std::size_t i = 0; i < n; ++i)
                        if (columns[parent][i] > 0.0) subset.push_back(X(i, v));
                    if (subset.empty()) continue;
                    std::sort(subset.begin(), subset.end());
                    values = subset;
                }
                for (double knot : candidate_knots(values, config.min_span)) {
                    if (pair) {
                        candidates.push_back({parent, v, knot, HingeDirection::Positive, true});
                    } else {
                        candidates.push_back({parent, v, knot, HingeDirection::Positive, false});
                        candidates.push_back({parent, v, knot, HingeDirection::Mirror, false});
                    }
                }
            }
        }
        if (candidates.empty()) break;

        const ScanBest best = scan_candidates(basis, X, columns, candidates, config.execution);
        const double new_mse = best.rss / static_cast<double>(n);
        if (!(basis.mse() - new_mse > config.improvement_tolerance * trace.initial_mse)) break;

        const KnotCandidate& c = candidates[best.index];
        const BasisFunction parent = c.parent ? bases[c.parent - 1] : BasisFunction{};
        std::vector<BasisFunction> added;
        if (c.pair) {
            added.push_back(extend(parent, c.variable, c.knot, HingeDirection::Positive));
            added.push_back(extend(parent, c.variable, c.knot, HingeDirection::Mirror));
        } else {
            added.push_back(extend(parent, c.variable, c.knot, c.direction));
        }
        for (auto& b : added) {
            columns.push_back(basis_column(b, X));
            basis.append(columns.back());
            bases.push_back(std::move(b));
        }
        trace.steps.push_back({trace.steps.size() + 1, c.variable, c.knot, c.parent, added.size(), basis.mse()});
    }

    return {assemble(basis, bases, p, config.penalty()), std::move(trace)};
}

PruneResult backward_prune(const MarsModel& overfit, const Matrix& X, std::span<const double> y,
                           const MarsFitConfig& config) {
    config.validate();
    check_data(X, y);
    if (overfit.n_predictors() != X.cols()) throw StructuralError("model and data disagree on predictor count");
    const std::size_t n = X.rows();
    const double penalty = config.penalty();

    std::vector<BasisFunction> bases;
    std::vector<std::vector<double>> columns;
    for (const auto& t : overfit.terms()) {
        bases.push_back(t.basis);
        columns.push_back(basis_column(t.basis, X));
    }

    auto subset_bases = [&](const std::vector<std::size_t>& active) {
        std::vector<BasisFunction> out;
        for (auto k : active) out.push_back(bases[k]);
        return out;
    };

    std::vector<std::size_t> active(bases.size());
    for (std::size_t k = 0; k < active.size(); ++k) active[k] = k;

    PruneTrace trace;
    {
        const OrthoBasis full = build_basis(y, columns, active);
        trace.initial_mse = full.mse();
        trace.initial_gcv = model_gcv(full.mse(), n, full.rank(), count_knots(subset_bases(active)), penalty);
    }

    double best_gcv = trace.initial_gcv;
    std::vector<double> rss(active.size());
    while (!active.empty()) {
        const auto m = static_cast<std::ptrdiff_t>(active.size());
        auto drop_one = [&](std::ptrdiff_t j) {
            std::vector<std::size_t> rest = active;
            rest.erase(rest.begin() + j);
            rss[static_cast<std::size_t>(j)] = build_basis(y, columns, rest).rss();
        };
        if (config.execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
            for (std::ptrdiff_t j = 0; j < m; ++j) drop_one(j);
        } else {
            for (std::ptrdiff_t j = 0; j < m; ++j) drop_one(j);
        }
        // active is ascending, so the first minimum is the lowest term id.
        std::size_t pick = 0;
        for (std::size_t j = 1; j < active.size(); ++j)
            if (rss[j] < rss[pick]) pick = j;

        const std::size_t removed = active[pick];
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(pick));
        const OrthoBasis now = build_basis(y, columns, active);
        const double gcv = model_gcv(now.mse(), n, now.rank(), count_knots(subset_bases(active)), penalty);
        trace.steps.push_back({trace.steps.size() + 1, removed + 1, now.mse(), gcv});
        if (gcv <= best_gcv) {
            best_gcv = gcv;
            trace.selected = trace.steps.size();
        }
    }

    std::vector<bool> keep(bases.size(), true);
    for (std::size_t s = 0; s < trace.selected; ++s) keep[trace.steps[s].removed - 1] = false;
    std::vector<BasisFunction> kept;
    for (std::size_t k = 0; k < bases.size(); ++k)
        if (keep[k]) kept.push_back(bases[k]);
    return {refit(kept, X, y, penalty), std::move(trace)};
}

MarsModel refit(const std::vector<BasisFunction>& bases, const Matrix& X, std::span<const double> y,
                double penalty) {
    check_data(X, y);
    std::vector<std::vector<double>> columns;
    std::vector<std::size_t> order;
    for (const auto& b : bases) {
        order.push_back(columns.size());
        columns.push_back(basis_column(b, X));
    }
    return assemble(build_basis(y, columns, order), bases, X.cols(), penalty);
}

FitResult fit(const Matrix& X, std::span<const double> y, const MarsFitConfig& config) {
    auto forward = forward_pass(X, y, config);
    auto pruned = backward_prune(forward.model, X, y, config);
    return {std::move(pruned.model), std::move(forward.trace), std::move(pruned.trace)};
}

std::string to_csv(const ForwardTrace& trace) {
    std::ostringstream os;
    os << "step,variable,knot,parent,terms_added,mse\n";
    os << "0,,,,0," << format_double(trace.initial_mse) << '\n';
    for (const auto& s : trace.steps)
        os << s.step << ',' << s.variable << ',' << format_double(s.knot) << ',' << s.parent << ','
           << s.terms_added << ',' << format_double(s.mse) << '\n';
    return os.str();
}

std::string to_csv(const PruneTrace& trace) {
    std::ostringstream os;
    os << "step,removed,mse,gcv\n";
    os << "0,," << format_double(trace.initial_mse) << ',' << format_double(trace.initial_gcv) << '\n';
    for (const auto& s : trace.steps)
        os << s.step << ',' << s.removed << ',' << format_double(s.mse) << ',' << format_double(s.gcv) << '\n';
    return os.str();
}

}  // namespace marsnet::mars
