#pragma once

// Test-side generators and oracles. Nothing here calls the library's
// evaluation, differentiation or integration code.

#include "chronocalc/fields.hpp"
#include "chronocalc/polynomial.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace testkit {

using chronocalc::ChartPoint;
using chronocalc::PolynomialMap;
using chronocalc::TimePiece;
using chronocalc::VectorField;
using Eigen::MatrixXd;
using Eigen::VectorXd;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    VectorXd vector(int n, double radius) {
        VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = uniform(-radius, radius);
        return v;
    }
    ChartPoint point(int n, double radius) { return ChartPoint(vector(n, radius)); }

    /// Sparse random polynomial map R^n -> R^m of total degree <= max_degree.
    PolynomialMap polynomial(int n, int m, int max_degree, int terms_per_component = 3, double scale = 1.0) {
        std::vector<PolynomialMap::Component> comps(static_cast<std::size_t>(m));
        for (auto& comp : comps) {
            for (int k = 0; k < terms_per_component; ++k) {
                std::vector<int> exps(static_cast<std::size_t>(n), 0);
                int budget = integer(0, max_degree);
                while (budget-- > 0) ++exps[static_cast<std::size_t>(integer(0, n - 1))];
                comp.push_back({uniform(-scale, scale), exps});
            }
        }
        return PolynomialMap(n, std::move(comps));
    }

    VectorField field(int n, int max_degree, double scale = 1.0) {
        return VectorField::autonomous(polynomial(n, n, max_degree, 3, scale));
    }

private:
    std::mt19937_64 rng_;
};

/// Direct monomial evaluation from the stored terms.
inline VectorXd eval(const PolynomialMap& p, const VectorXd& x) {
    VectorXd out = VectorXd::Zero(p.dim_out());
    for (int r = 0; r < p.dim_out(); ++r) {
        for (const auto& term : p.components()[static_cast<std::size_t>(r)]) {
            double m = term.coef;
            for (int i = 0; i < p.dim_in(); ++i) {
                for (int e = 0; e < term.exps[static_cast<std::size_t>(i)]; ++e) m *= x[i];
            }
            out[r] += m;
        }
    }
    return out;
}

/// Five-point central difference Jacobian.
inline MatrixXd fd_jacobian(const std::function<VectorXd(const VectorXd&)>& f, const VectorXd& x, double h = 1e-3) {
    const VectorXd f0 = f(x);
    MatrixXd j(f0.size(), x.size());
    for (Eigen::Index c = 0; c < x.size(); ++c) {
        auto at = [&](double s) {
            VectorXd y = x;
            y[c] += s * h;
            return f(y);
        };
        j.col(c) = (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h);
    }
    return j;
}

/// Field value straight from the pieces (later piece wins at breakpoints).
inline VectorXd field_value(const VectorField& f, double t, const VectorXd& x) {
    const auto& pieces = f.pieces();
    std::size_t idx = 0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (t >= pieces[i].begin) idx = i;
    }
    return eval(pieces[idx].map, x);
}

/// Kutta's 3/8 rule with a fixed step, restarting at every breakpoint between
/// t0 and t1. A different scheme from the library solver on purpose.
inline VectorXd oracle_flow(const VectorField& f, double t0, double t1, const VectorXd& x0, int steps_per_unit = 4000) {
    std::vector<double> cuts{t0};
    for (const auto& p : f.pieces()) {
        for (double b : {p.begin, p.end}) {
            if (std::isfinite(b) && std::min(t0, t1) < b && b < std::max(t0, t1)) cuts.push_back(b);
        }
    }
    std::sort(cuts.begin() + 1, cuts.end());
    cuts.erase(std::unique(cuts.begin() + 1, cuts.end()), cuts.end());
    if (t1 < t0) std::reverse(cuts.begin() + 1, cuts.end());
    cuts.push_back(t1);

    VectorXd x = x0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double a = cuts[s];
        const double b = cuts[s + 1];
        const double mid = 0.5 * (a + b);
        auto rhs = [&](const VectorXd& y) { return field_value(f, mid, y); };
        const int n = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) * steps_per_unit)));
        const double h = (b - a) / n;
        for (int i = 0; i < n; ++i) {
            const VectorXd k1 = rhs(x);
            const VectorXd k2 = rhs(x + h * k1 / 3.0);
            const VectorXd k3 = rhs(x + h * (-k1 / 3.0 + k2));
            const VectorXd k4 = rhs(x + h * (k1 - k2 + k3));
            x += h * (k1 + 3.0 * k2 + 3.0 * k3 + k4) / 8.0;
        }
    }
    return x;
}

/// Closed-form flows of the catalog fields over a duration t.
inline VectorXd rotation_flow(const VectorXd& q, double t) {
    return VectorXd{{std::cos(t) * q[0] - std::sin(t) * q[1], std::sin(t) * q[0] + std::cos(t) * q[1]}};
}
inline VectorXd heisenberg_v1_flow(const VectorXd& q, double t) {
    return VectorXd{{q[0] + t, q[1], q[2] - 0.5 * q[1] * t}};
}
inline VectorXd heisenberg_v2_flow(const VectorXd& q, double t) {
    return VectorXd{{q[0], q[1] + t, q[2] + 0.5 * q[0] * t}};
}
inline VectorXd nilpotent_flow(const VectorXd& q, double t) { return VectorXd{{q[0] + t * q[1], q[1]}}; }

/// A piecewise-in-time field on R^2: rotation on [0, 0.5), shear on
/// [0.5, 1.2), constant drift on [1.2, 2].
inline VectorField piecewise_field() {
    MatrixXd rot{{0, -1}, {1, 0}};
    MatrixXd shear{{0, 1}, {0, 0}};
    return VectorField::piecewise({{0.0, 0.5, PolynomialMap::linear(rot)},
                                   {0.5, 1.2, PolynomialMap::linear(shear)},
                                   {1.2, 2.0, PolynomialMap::constant(2, VectorXd{{0.3, -0.7}})}});
}

inline double max_abs(const VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

} // namespace testkit
