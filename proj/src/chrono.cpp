#include "chronocalc/chrono.hpp"

#include "chronocalc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace chronocalc {

namespace {

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

void check_common(const VectorField& field, const Observable& obs, const ChartPoint& q, double t0, double t) {
    if (field.dim() != q.dim() || obs.dim_in() != q.dim()) {
        throw DimensionError("field, observable and point must share the chart dimension");
    }
    if (!field.covers(t0, t)) throw TimeWindowError("interval leaves the field's time window");
}

/// Lifted observables V_{k} ... V_{1} phi keyed by the active piece of each field.
class LiftCache {
public:
    LiftCache(const std::vector<VectorField>& fields, const PolynomialMap& phi) : fields_(fields), phi_(phi) {}

    const PolynomialMap& get(const std::vector<double>& taus) {
        std::vector<std::size_t> key(taus.size());
        for (std::size_t j = 0; j < taus.size(); ++j) key[j] = fields_[j].piece_index(taus[j]);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        PolynomialMap lifted = phi_;
        for (std::size_t j = 0; j < key.size(); ++j) {
            lifted = lifted.directional_derivative(fields_[j].piece_map(key[j]));
        }
        return cache_.emplace(std::move(key), std::move(lifted)).first->second;
    }

private:
    const std::vector<VectorField>& fields_;
    const PolynomialMap& phi_;
    std::map<std::vector<std::size_t>, PolynomialMap> cache_;
};

std::vector<double> union_breakpoints(const std::vector<VectorField>& fields, double t0, double t) {
    std::vector<double> out;
    for (const auto& f : fields) {
        auto b = f.breakpoints_between(t0, t);
        out.insert(out.end(), b.begin(), b.end());
    }
    return cuts_between(out, t0, t);
}

} // namespace

Eigen::VectorXd simplex_integral_term(const std::vector<VectorField>& fields, const Observable& obs,
                                      const ChartPoint& q, double t0, double t, int nodes, QuadraturePath path) {
    const int k = static_cast<int>(fields.size());
    if (k < 1) throw ValidationError("simplex term needs at least one field");
    if (nodes < 1) throw ValidationError("quadrature needs at least one node");
    for (const auto& f : fields) check_common(f, obs, q, t0, t);
    if (obs.max_derivative_order < k) {
        throw DefectExhaustedError("order-" + std::to_string(k) + " term needs derivative order " +
                                   std::to_string(k) + ", observable has " +
                                   std::to_string(obs.max_derivative_order));
    }
    if (t == t0) return Eigen::VectorXd::Zero(obs.dim_out());

    const bool autonomous =
        std::all_of(fields.begin(), fields.end(), [](const VectorField& f) { return f.is_autonomous(); });
    if (autonomous && path == QuadraturePath::Auto) {
        std::vector<std::pair<VectorField, double>> seq;
        for (const auto& f : fields) seq.emplace_back(f, t0);
        return std::pow(t - t0, k) / factorial(k) * iterate_lift(seq, obs)(q);
    }

    LiftCache cache(fields, obs.map);
    const GaussLegendreRule rule = gauss_legendre(nodes);
    return simplex_integral(rule, k, t0, t, union_breakpoints(fields, t0, t),
                            [&](const std::vector<double>& taus) -> Eigen::VectorXd { return cache.get(taus)(q.coords()); });
}

Eigen::VectorXd volterra_truncate(const VectorField& field, const Observable& obs, const ChartPoint& q, double t0,
                                  double t, int k, int nodes) {
    if (k < 1) throw ValidationError("truncation order k must be at least 1");
    check_common(field, obs, q, t0, t);
    if (obs.max_derivative_order < k - 1) {
        throw DefectExhaustedError("truncation at k = " + std::to_string(k) + " needs derivative order " +
                                   std::to_string(k - 1));
    }
    Eigen::VectorXd sum = obs(q);
    std::vector<VectorField> fields;
    for (int i = 1; i < k; ++i) {
        fields.push_back(field);
        sum += simplex_integral_term(fields, obs, q, t0, t, nodes);
    }
    return sum;
}

RemainderReport remainder_eval(const VectorField& field, const Observable& obs, const ChartPoint& q, double t0,
                               double t, int k, const FlowSolver& solver, int nodes,
                               const std::optional<LocallyBoundedWitness>& witness, RemainderMethod method) {
    check_common(field, obs, q, t0, t);
    RemainderReport report{k, t, 0.0, std::nullopt};
    if (witness) {
        if (witness->order < k) throw ValidationError("witness order is below the remainder order");
        report.bound = witness->bound_C * std::pow(std::abs(t - t0), k) / factorial(k);
    }
    if (t == t0) {
        if (k < 1) throw ValidationError("truncation order k must be at least 1");
        return report;
    }

    if (method == RemainderMethod::Difference) {
        const Eigen::VectorXd truncated = volterra_truncate(field, obs, q, t0, t, k, nodes);
        const Eigen::VectorXd exact = flow_operator_apply(FlowMap{field, t0, t, solver}, obs, q);
        report.remainder_norm = (exact - truncated).norm();
        return report;
    }

    if (k < 1 || k > 2) throw ValidationError("direct remainder evaluation is limited to k <= 2");
    if (obs.max_derivative_order < k) throw DefectExhaustedError("direct remainder needs derivative order k");
    const std::vector<VectorField> fields(static_cast<std::size_t>(k), field);
    LiftCache cache(fields, obs.map);
    const GaussLegendreRule rule = gauss_legendre(nodes);
    const Eigen::VectorXd value =
        simplex_integral(rule, k, t0, t, union_breakpoints(fields, t0, t),
                         [&](const std::vector<double>& taus) -> Eigen::VectorXd {
                             const ChartPoint p = flow_map(FlowMap{field, t0, taus.back(), solver}, q);
                             return cache.get(taus)(p.coords());
                         });
    report.remainder_norm = value.norm();
    return report;
}

double OrderEstimate::max_norm() const noexcept {
    double m = 0.0;
    for (double v : norms) m = std::max(m, v);
    return m;
}

DegenerateProbe::DegenerateProbe(OrderEstimate estimate)
    : NumericalError("order probe has " + std::to_string(estimate.usable_points()) +
                     " usable points; the sampled family cancels to round-off"),
      estimate_(std::move(estimate)) {}

OrderEstimate fit_order(std::vector<double> t_grid, std::vector<double> norms) {
    OrderEstimate est;
    est.t_grid = std::move(t_grid);
    est.norms = std::move(norms);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t j = 0; j < est.norms.size(); ++j) {
        if (!(est.norms[j] > kProbeZero)) {
            est.excluded.push_back(static_cast<int>(j));
            continue;
        }
        const double x = std::log(est.t_grid[j]);
        const double y = std::log(est.norms[j]);
        pts.emplace_back(x, y);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    if (pts.size() < 2) {
        est.degenerate = true;
        return est;
    }
    const double m = static_cast<double>(pts.size());
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / m;
    const double mean_y = sy / m;
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& [x, y] : pts) {
        const double r = y - (intercept + slope * x);
        ss_res += r * r;
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    est.fitted_slope = slope;
    est.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return est;
}

OrderEstimate order_probe(const std::function<double(double)>& sample, double t_max, int levels) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ValidationError("order probe needs t_max > 0");
    if (levels < 4) throw ValidationError("order probe needs at least 4 levels");
    std::vector<double> ts(static_cast<std::size_t>(levels));
    std::vector<double> norms(static_cast<std::size_t>(levels));
    for (int j = 0; j < levels; ++j) {
        const double t = std::ldexp(t_max, -j);
        const double v = sample(t);
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ValidationError("order probe sample must be a finite nonnegative number, got " + std::to_string(v));
        }
        ts[static_cast<std::size_t>(j)] = t;
        norms[static_cast<std::size_t>(j)] = v;
    }
    OrderEstimate est = fit_order(std::move(ts), std::move(norms));
    if (est.degenerate) throw DegenerateProbe(std::move(est));
    return est;
}

double integral_equation_residual(const VectorField& field, const Observable& obs, const ChartPoint& q, double t0,
                                  double t, const FlowSolver& solver, int nodes) {
    check_common(field, obs, q, t0, t);
    if (nodes < 1) throw ValidationError("quadrature needs at least one node");
    if (obs.max_derivative_order < 1) throw DefectExhaustedError("integral equation needs one derivative order");
    if (t == t0) return 0.0;

    const std::vector<VectorField> fields{field};
    LiftCache cache(fields, obs.map);
    const GaussLegendreRule rule = gauss_legendre(nodes);
    const Eigen::VectorXd integral =
        integrate(rule, t0, t, field.breakpoints_between(t0, t), [&](double tau) -> Eigen::VectorXd {
            const ChartPoint p = flow_map(FlowMap{field, t0, tau, solver}, q);
            return cache.get({tau})(p.coords());
        });
    const Eigen::VectorXd lhs = flow_operator_apply(FlowMap{field, t0, t, solver}, obs, q);
    return (lhs - obs(q) - integral).norm();
}

} // namespace chronocalc
