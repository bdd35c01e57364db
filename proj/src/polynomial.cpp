#include "chronocalc/polynomial.hpp"

#include "chronocalc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace chronocalc {

namespace {

using Accumulator = std::map<std::vector<int>, double>;

PolynomialMap::Component to_component(const Accumulator& acc) {
    PolynomialMap::Component out;
    out.reserve(acc.size());
    for (const auto& [exps, coef] : acc) {
        if (coef != 0.0) out.push_back({coef, exps});
    }
    return out;
}

double monomial_value(const std::vector<int>& exps, const Eigen::VectorXd& x) {
    double v = 1.0;
    for (std::size_t j = 0; j < exps.size(); ++j) {
        for (int e = 0; e < exps[j]; ++e) v *= x[static_cast<Eigen::Index>(j)];
    }
    return v;
}

void check_dims(int dim_in, int dim_out) {
    if (dim_in <= 0 || dim_out <= 0) {
        throw DimensionError("polynomial map dimensions must be positive, got " +
                             std::to_string(dim_in) + " -> " + std::to_string(dim_out));
    }
}

} // namespace

PolynomialMap::PolynomialMap(int dim_in, int dim_out) : dim_in_(dim_in), components_(static_cast<std::size_t>(std::max(dim_out, 0))) {
    check_dims(dim_in, dim_out);
}

PolynomialMap::PolynomialMap(int dim_in, std::vector<Component> components) : dim_in_(dim_in) {
    check_dims(dim_in, static_cast<int>(components.size()));
    components_.reserve(components.size());
    for (auto& comp : components) {
        Accumulator acc;
        for (auto& term : comp) {
            if (static_cast<int>(term.exps.size()) != dim_in) {
                throw DimensionError("exponent tuple of length " + std::to_string(term.exps.size()) +
                                     " in a polynomial on R^" + std::to_string(dim_in));
            }
            if (std::any_of(term.exps.begin(), term.exps.end(), [](int e) { return e < 0; })) {
                throw ValidationError("negative exponent in polynomial term");
            }
            if (!std::isfinite(term.coef)) throw ValidationError("non-finite polynomial coefficient");
            acc[term.exps] += term.coef;
        }
        components_.push_back(to_component(acc));
    }
}

PolynomialMap PolynomialMap::constant(int dim_in, const Eigen::VectorXd& value) {
    std::vector<Component> comps(static_cast<std::size_t>(value.size()));
    for (Eigen::Index i = 0; i < value.size(); ++i) {
        comps[static_cast<std::size_t>(i)].push_back({value[i], std::vector<int>(static_cast<std::size_t>(dim_in), 0)});
    }
    return PolynomialMap(dim_in, std::move(comps));
}

PolynomialMap PolynomialMap::linear(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.cols());
    std::vector<Component> comps(static_cast<std::size_t>(a.rows()));
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            std::vector<int> e(static_cast<std::size_t>(n), 0);
            e[static_cast<std::size_t>(c)] = 1;
            comps[static_cast<std::size_t>(r)].push_back({a(r, c), std::move(e)});
        }
    }
    return PolynomialMap(n, std::move(comps));
}

PolynomialMap PolynomialMap::identity(int dim) { return linear(Eigen::MatrixXd::Identity(dim, dim)); }

PolynomialMap PolynomialMap::coordinate(int dim, int index) {
    if (index < 0 || index >= dim) throw IndexError("coordinate index out of range");
    std::vector<int> e(static_cast<std::size_t>(dim), 0);
    e[static_cast<std::size_t>(index)] = 1;
    return PolynomialMap(dim, {Component{{1.0, std::move(e)}}});
}

Eigen::VectorXd PolynomialMap::operator()(const Eigen::VectorXd& x) const {
    if (x.size() != dim_in_) {
        throw DimensionError("evaluating a polynomial on R^" + std::to_string(dim_in_) + " at a point of dimension " +
                             std::to_string(x.size()));
    }
    Eigen::VectorXd out(dim_out());
    for (std::size_t i = 0; i < components_.size(); ++i) {
        double s = 0.0;
        for (const auto& t : components_[i]) s += t.coef * monomial_value(t.exps, x);
        out[static_cast<Eigen::Index>(i)] = s;
    }
    return out;
}

Eigen::MatrixXd PolynomialMap::jacobian(const Eigen::VectorXd& x) const {
    if (x.size() != dim_in_) throw DimensionError("jacobian evaluated at a point of the wrong dimension");
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(dim_out(), dim_in_);
    for (std::size_t i = 0; i < components_.size(); ++i) {
        for (const auto& t : components_[i]) {
            for (int c = 0; c < dim_in_; ++c) {
                const int e = t.exps[static_cast<std::size_t>(c)];
                if (e == 0) continue;
                auto lowered = t.exps;
                --lowered[static_cast<std::size_t>(c)];
                jac(static_cast<Eigen::Index>(i), c) += t.coef * e * monomial_value(lowered, x);
            }
        }
    }
    return jac;
}

PolynomialMap PolynomialMap::partial(int var) const {
    if (var < 0 || var >= dim_in_) throw IndexError("partial derivative variable out of range");
    std::vector<Component> comps(components_.size());
    for (std::size_t i = 0; i < components_.size(); ++i) {
        for (const auto& t : components_[i]) {
            const int e = t.exps[static_cast<std::size_t>(var)];
            if (e == 0) continue;
            auto lowered = t.exps;
            --lowered[static_cast<std::size_t>(var)];
            comps[i].push_back({t.coef * e, std::move(lowered)});
        }
    }
    return PolynomialMap(dim_in_, std::move(comps));
}

PolynomialMap PolynomialMap::component(int index) const {
    if (index < 0 || index >= dim_out()) throw IndexError("component index out of range");
    return PolynomialMap(dim_in_, {components_[static_cast<std::size_t>(index)]});
}

PolynomialMap PolynomialMap::scalar_product(const PolynomialMap& a, const PolynomialMap& b) {
    if (a.dim_out() != 1 || b.dim_out() != 1 || a.dim_in_ != b.dim_in_) {
        throw DimensionError("scalar_product needs two scalar polynomials on the same space");
    }
    Accumulator acc;
    for (const auto& ta : a.components_[0]) {
        for (const auto& tb : b.components_[0]) {
            std::vector<int> e(ta.exps.size());
            for (std::size_t j = 0; j < e.size(); ++j) e[j] = ta.exps[j] + tb.exps[j];
            acc[e] += ta.coef * tb.coef;
        }
    }
    return PolynomialMap(a.dim_in_, {to_component(acc)});
}

PolynomialMap PolynomialMap::directional_derivative(const PolynomialMap& v) const {
    if (v.dim_in_ != dim_in_ || v.dim_out() != dim_in_) {
        throw DimensionError("directional derivative needs a field R^n -> R^n matching the map's domain");
    }
    std::vector<Accumulator> accs(components_.size());
    for (int j = 0; j < dim_in_; ++j) {
        const PolynomialMap dj = partial(j);
        const PolynomialMap vj = v.component(j);
        if (vj.is_zero()) continue;
        for (std::size_t i = 0; i < components_.size(); ++i) {
            const auto& comp = dj.components_[i];
            if (comp.empty()) continue;
            for (const auto& ta : comp) {
                for (const auto& tb : vj.components_[0]) {
                    std::vector<int> e(ta.exps.size());
                    for (std::size_t k = 0; k < e.size(); ++k) e[k] = ta.exps[k] + tb.exps[k];
                    accs[i][e] += ta.coef * tb.coef;
                }
            }
        }
    }
    std::vector<Component> comps;
    comps.reserve(accs.size());
    for (const auto& acc : accs) comps.push_back(to_component(acc));
    return PolynomialMap(dim_in_, std::move(comps));
}

PolynomialMap PolynomialMap::operator+(const PolynomialMap& other) const {
    if (other.dim_in_ != dim_in_ || other.dim_out() != dim_out()) throw DimensionError("adding polynomial maps of different shapes");
    std::vector<Component> comps(components_.size());
    for (std::size_t i = 0; i < components_.size(); ++i) {
        comps[i] = components_[i];
        comps[i].insert(comps[i].end(), other.components_[i].begin(), other.components_[i].end());
    }
    return PolynomialMap(dim_in_, std::move(comps));
}

PolynomialMap PolynomialMap::operator-(const PolynomialMap& other) const { return *this + (-other); }

PolynomialMap PolynomialMap::operator-() const { return *this * -1.0; }

PolynomialMap PolynomialMap::operator*(double s) const {
    std::vector<Component> comps = components_;
    for (auto& comp : comps) {
        for (auto& t : comp) t.coef *= s;
    }
    return PolynomialMap(dim_in_, std::move(comps));
}

bool PolynomialMap::is_zero() const noexcept {
    return std::all_of(components_.begin(), components_.end(), [](const Component& c) { return c.empty(); });
}

int PolynomialMap::degree() const noexcept {
    int deg = 0;
    for (const auto& comp : components_) {
        for (const auto& t : comp) {
            int d = 0;
            for (int e : t.exps) d += e;
            deg = std::max(deg, d);
        }
    }
    return deg;
}

double PolynomialMap::max_abs_coefficient() const noexcept {
    double m = 0.0;
    for (const auto& comp : components_) {
        for (const auto& t : comp) m = std::max(m, std::abs(t.coef));
    }
    return m;
}

} // namespace chronocalc
