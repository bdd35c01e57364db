#pragma once

#include <cstddef>
#include <type_traits>
#include <utility>
#include <vector>

namespace chronocalc {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }
};

GaussLegendreRule gauss_legendre(int n);

namespace detail {

template <class T>
void accumulate(T& sum, bool& started, double w, T value) {
    if (!started) {
        sum = w * std::move(value);
        started = true;
    } else {
        sum += w * value;
    }
}

} // namespace detail

/// Composite Gauss-Legendre over [a, b] split at `cuts` (interior points,
/// ordered from a towards b). b < a yields the signed integral.
template <class F>
auto integrate(const GaussLegendreRule& rule, double a, double b, const std::vector<double>& cuts, F&& f)
    -> std::decay_t<decltype(f(a))> {
    using T = std::decay_t<decltype(f(a))>;
    T sum{};
    bool started = false;
    double lo = a;
    for (std::size_t s = 0; s <= cuts.size(); ++s) {
        const double hi = s < cuts.size() ? cuts[s] : b;
        const double half = 0.5 * (hi - lo);
        const double mid = 0.5 * (hi + lo);
        for (std::size_t i = 0; i < rule.size(); ++i) {
            detail::accumulate(sum, started, half * rule.weights[i], f(mid + half * rule.nodes[i]));
        }
        lo = hi;
    }
    return sum;
}

/// Interior points of `breakpoints` strictly between a and b, ordered a -> b.
std::vector<double> cuts_between(const std::vector<double>& breakpoints, double a, double b);

namespace detail {

template <class F>
auto simplex_level(const GaussLegendreRule& rule, const std::vector<double>& breakpoints, double t0, double upper,
                   std::vector<double>& taus, std::size_t level, F& f) -> std::decay_t<decltype(f(taus))> {
    return integrate(rule, t0, upper, cuts_between(breakpoints, t0, upper), [&](double tau) {
        taus[level] = tau;
        if (level + 1 == taus.size()) return f(taus);
        return simplex_level(rule, breakpoints, t0, tau, taus, level + 1, f);
    });
}

} // namespace detail

/// Iterated quadrature over the simplex t0 <= tau_k <= ... <= tau_1 <= t.
/// f receives (tau_1, ..., tau_k); every level is split at `breakpoints`.
template <class F>
auto simplex_integral(const GaussLegendreRule& rule, int k, double t0, double t, const std::vector<double>& breakpoints,
                      F&& f) {
    std::vector<double> taus(static_cast<std::size_t>(k));
    return detail::simplex_level(rule, breakpoints, t0, t, taus, 0, f);
}

} // namespace chronocalc
