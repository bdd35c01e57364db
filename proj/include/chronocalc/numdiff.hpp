#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace chronocalc {

/// Central-difference step for coordinate value x: eps^(1/3) * max(1, |x|).
inline double central_step(double x) {
    static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
    return base * std::max(1.0, std::abs(x));
}

/// Central-difference Jacobian of f : R^n -> R^m at x. Only an oracle; the
/// library differentiates polynomials exactly.
template <class F>
Eigen::MatrixXd central_jacobian(F&& f, const Eigen::VectorXd& x) {
    const Eigen::VectorXd f0 = f(x);
    Eigen::MatrixXd jac(f0.size(), x.size());
    for (Eigen::Index c = 0; c < x.size(); ++c) {
        const double h = central_step(x[c]);
        Eigen::VectorXd xp = x;
        Eigen::VectorXd xm = x;
        xp[c] += h;
        xm[c] -= h;
        jac.col(c) = (f(xp) - f(xm)) / (xp[c] - xm[c]);
    }
    return jac;
}

} // namespace chronocalc
