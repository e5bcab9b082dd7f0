#include "marsnet/mars_model.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace marsnet::mars {

bool BasisFunction::uses_variable(std::size_t variable) const noexcept {
    for (const auto& f : factors)
        if (f.variable == variable) return true;
    return false;
}

double hinge_eval(double x, double knot, HingeDirection direction) {
    if (!std::isfinite(x) || !std::isfinite(knot)) throw DomainError("hinge_eval: non-finite input");
    const double d = direction == HingeDirection::Positive ? x - knot : knot - x;
    return d > 0.0 ? d : 0.0;
}

double hinge_eval(const HingeTerm& hinge, std::span<const double> row) {
    if (hinge.variable >= row.size())
        throw StructuralError("hinge variable " + std::to_string(hinge.variable) + " out of range");
    return hinge_eval(row[hinge.variable], hinge.knot, hinge.direction);
}

double basis_eval(const BasisFunction& basis, std::span<const double> row) {
    double value = 1.0;
    for (const auto& f : basis.factors) value *= hinge_eval(f, row);
    return value;
}

std::size_t count_knots(std::span<const Term> terms) {
    std::set<std::pair<std::size_t, double>> knots;
    for (const auto& t : terms)
        for (const auto& f : t.basis.factors) knots.emplace(f.variable, f.knot);
    return knots.size();
}

MarsModel::MarsModel(std::size_t n_predictors, double intercept, std::vector<Term> terms,
                     double fit_mse, double fit_gcv)
    : n_predictors_(n_predictors),
      intercept_(intercept),
      terms_(std::move(terms)),
      fit_mse_(fit_mse),
      fit_gcv_(fit_gcv) {
    for (const auto& t : terms_) {
        if (t.basis.factors.empty()) throw StructuralError("basis function without factors");
        for (std::size_t i = 0; i < t.basis.factors.size(); ++i) {
            const auto& f = t.basis.factors[i];
            if (f.variable >= n_predictors_) throw StructuralError("basis references unknown predictor");
            if (!std::isfinite(f.knot)) throw DomainError("non-finite knot");
            for (std::size_t j = 0; j < i; ++j)
                if (t.basis.factors[j].variable == f.variable)
                    throw StructuralError("two hinges on one variable in a basis");
        }
    }
    knot_count_ = count_knots(terms_);
}

double MarsModel::predict(std::span<const double> row) const {
    if (row.size() != n_predictors_)
        throw StructuralError("row has " + std::to_string(row.size()) + " values, model expects " +
                              std::to_string(n_predictors_));
    double y = intercept_;
    for (const auto& t : terms_) y += t.coefficient * basis_eval(t.basis, row);
    return y;
}

std::vector<double> MarsModel::predict_batch(const Matrix& rows) const {
    std::vector<double> out;
    out.reserve(rows.rows());
    if (rows.empty()) return out;
    if (rows.cols() != n_predictors_) throw StructuralError("design matrix width mismatch");
    for (std::size_t i = 0; i < rows.rows(); ++i) out.push_back(predict(rows.row(i)));
    return out;
}

std::string MarsModel::describe() const {
    std::ostringstream os;
    os.precision(6);
    os << intercept_;
    for (const auto& t : terms_) {
        os << (t.coefficient < 0 ? " - " : " + ") << std::abs(t.coefficient);
        for (const auto& f : t.basis.factors) {
            os << "*max(0, ";
            if (f.direction == HingeDirection::Positive)
                os << 'x' << f.variable << " - " << f.knot;
            else
                os << f.knot << " - x" << f.variable;
            os << ')';
        }
    }
    return os.str();
}

namespace {

using nlohmann::json;

// JSON has no infinity; an unbounded GCV is written as null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_inf(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

std::string MarsModel::to_json() const {
    json terms = json::array();
    for (const auto& t : terms_) {
        json factors = json::array();
        for (const auto& f : t.basis.factors)
            factors.push_back({{"var", f.variable},
                               {"knot", f.knot},
                               {"dir", f.direction == HingeDirection::Positive ? "+" : "-"}});
        terms.push_back({{"coef", t.coefficient}, {"factors", std::move(factors)}});
    }
    json j = {{"model", "mars"},
              {"n_predictors", n_predictors_},
              {"intercept", intercept_},
              {"terms", std::move(terms)},
              {"fit_mse", number_or_null(fit_mse_)},
              {"fit_gcv", number_or_null(fit_gcv_)},
              {"knot_count", knot_count_}};
    return j.dump(2);
}

MarsModel MarsModel::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
        if (j.at("model") != "mars") throw StructuralError("not a MARS model document");
        std::vector<Term> terms;
        for (const auto& jt : j.at("terms")) {
            Term t;
            t.coefficient = jt.at("coef").get<double>();
            for (const auto& jf : jt.at("factors")) {
                const auto dir = jf.at("dir").get<std::string>();
                if (dir != "+" && dir != "-") throw StructuralError("hinge direction must be + or -");
                t.basis.factors.push_back({jf.at("var").get<std::size_t>(), jf.at("knot").get<double>(),
                                           dir == "+" ? HingeDirection::Positive : HingeDirection::Mirror});
            }
            terms.push_back(std::move(t));
        }
        return MarsModel(j.at("n_predictors").get<std::size_t>(), j.at("intercept").get<double>(),
                         std::move(terms), number_or_inf(j.at("fit_mse")), number_or_inf(j.at("fit_gcv")));
    } catch (const json::exception& e) {
        throw StructuralError(std::string("malformed model JSON: ") + e.what());
    }
}

}  // namespace marsnet::mars
