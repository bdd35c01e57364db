#include "chronocalc/flow.hpp"

#include "chronocalc/errors.hpp"

#include <cmath>
#include <string>

namespace chronocalc {

namespace {

void validate_solver(const FlowSolver& solver) {
    if (solver.steps_per_unit_time <= 0) throw ValidationError("steps_per_unit_time must be positive");
}

long step_count(double length, int steps_per_unit) {
    // The shave keeps exact multiples (e.g. 0.5 * 1000) from rounding up a step.
    const double raw = std::abs(length) * steps_per_unit * (1.0 - 1e-12);
    return std::max(1L, static_cast<long>(std::ceil(raw)));
}

std::vector<double> cut_points(double t0, double t1, const std::vector<double>& breakpoints) {
    std::vector<double> cuts{t0};
    cuts.insert(cuts.end(), breakpoints.begin(), breakpoints.end());
    cuts.push_back(t1);
    return cuts;
}

void check_state(const Eigen::VectorXd& x, long step, double t) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || std::abs(x[i]) > kBlowUpThreshold) {
            throw BlowUpError("integration diverged at step " + std::to_string(step) + " (t = " + std::to_string(t) +
                                  ")",
                              step, t);
        }
    }
}

/// Classical RK4 over consecutive cut points. deriv(t, segment_mid, x) may use
/// segment_mid to pin the active time piece for the whole sub-interval.
template <class Deriv>
Eigen::VectorXd rk4_over_cuts(const std::vector<double>& cuts, int steps_per_unit, Eigen::VectorXd x, Deriv&& deriv) {
    long step = 0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double a = cuts[s];
        const double b = cuts[s + 1];
        if (a == b) continue;
        const double mid = 0.5 * (a + b);
        const long n = step_count(b - a, steps_per_unit);
        const double h = (b - a) / static_cast<double>(n);
        for (long i = 0; i < n; ++i) {
            const double t = a + static_cast<double>(i) * h;
            const Eigen::VectorXd k1 = deriv(t, mid, x);
            const Eigen::VectorXd k2 = deriv(t + 0.5 * h, mid, x + 0.5 * h * k1);
            const Eigen::VectorXd k3 = deriv(t + 0.5 * h, mid, x + 0.5 * h * k2);
            const double t_next = i + 1 == n ? b : t + h;
            const Eigen::VectorXd k4 = deriv(t_next, mid, x + h * k3);
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            ++step;
            check_state(x, step, t_next);
        }
    }
    return x;
}

std::vector<double> field_cuts(const FlowMap& fm) {
    if (!fm.field.covers(fm.t0, fm.t1)) {
        throw TimeWindowError("flow interval [" + std::to_string(fm.t0) + ", " + std::to_string(fm.t1) +
                              "] leaves the field's time window");
    }
    if (!fm.solver.breakpoint_splitting) return {fm.t0, fm.t1};
    return cut_points(fm.t0, fm.t1, fm.field.breakpoints_between(fm.t0, fm.t1));
}

/// Active piece for a stage: pinned by the sub-interval midpoint when
/// splitting, looked up at the stage time otherwise.
const PolynomialMap& stage_map(const FlowMap& fm, double t, double mid) {
    return fm.field.at_time(fm.solver.breakpoint_splitting ? mid : t);
}

void check_point(const FlowMap& fm, const ChartPoint& q) {
    validate_solver(fm.solver);
    if (q.dim() != fm.field.dim()) {
        throw DimensionError("flow of a field on R^" + std::to_string(fm.field.dim()) + " applied to a point in R^" +
                             std::to_string(q.dim()));
    }
}

} // namespace

ChartPoint flow_map(const FlowMap& fm, const ChartPoint& q) {
    check_point(fm, q);
    if (fm.t0 == fm.t1) return q;
    const auto cuts = field_cuts(fm);
    Eigen::VectorXd x = rk4_over_cuts(cuts, fm.solver.steps_per_unit_time, q.coords(),
                                      [&](double t, double mid, const Eigen::VectorXd& y) {
                                          return stage_map(fm, t, mid)(y);
                                      });
    return ChartPoint(std::move(x));
}

FlowState flow_with_pushforward(const FlowMap& fm, const ChartPoint& q) {
    check_point(fm, q);
    const int n = q.dim();
    if (fm.t0 == fm.t1) return {q, Eigen::MatrixXd::Identity(n, n)};
    const auto cuts = field_cuts(fm);

    Eigen::VectorXd state(n + n * n);
    state.head(n) = q.coords();
    Eigen::Map<Eigen::MatrixXd>(state.data() + n, n, n).setIdentity();

    state = rk4_over_cuts(cuts, fm.solver.steps_per_unit_time, std::move(state),
                          [&](double t, double mid, const Eigen::VectorXd& y) {
                              const PolynomialMap& p = stage_map(fm, t, mid);
                              const Eigen::VectorXd x = y.head(n);
                              Eigen::VectorXd dy(y.size());
                              dy.head(n) = p(x);
                              Eigen::Map<const Eigen::MatrixXd> m(y.data() + n, n, n);
                              Eigen::Map<Eigen::MatrixXd>(dy.data() + n, n, n) = p.jacobian(x) * m;
                              return dy;
                          });
    Eigen::MatrixXd push = Eigen::Map<const Eigen::MatrixXd>(state.data() + n, n, n);
    return {ChartPoint(Eigen::VectorXd(state.head(n))), std::move(push)};
}

Eigen::MatrixXd flow_pushforward(const FlowMap& fm, const ChartPoint& q) {
    return flow_with_pushforward(fm, q).pushforward;
}

ChartPoint inverse_flow(const FlowMap& fm, const ChartPoint& q) { return flow_map(fm.inverse(), q); }

Eigen::VectorXd flow_operator_apply(const FlowMap& fm, const Observable& obs, const ChartPoint& q) {
    if (obs.dim_in() != fm.field.dim()) throw DimensionError("observable and flow live on different spaces");
    return obs(flow_map(fm, q));
}

PushforwardField::PushforwardField(FlowMap transport, VectorField field, double t_eval)
    : transport_(std::move(transport)), field_(std::move(field)), t_eval_(t_eval) {
    if (transport_.field.dim() != field_.dim()) throw DimensionError("pushforward of a field on a different space");
}

Eigen::VectorXd PushforwardField::operator()(const ChartPoint& r) const {
    const ChartPoint p = inverse_flow(transport_, r);
    return flow_pushforward(transport_, p) * eval_field(field_, t_eval_, p);
}

PushforwardField pushforward_field(const FlowMap& transport, const VectorField& field, double t_eval) {
    return PushforwardField(transport, field, t_eval);
}

Eigen::VectorXd integrate_rk4(const OdeRhs& rhs, double t0, double t1, Eigen::VectorXd x0, const FlowSolver& solver,
                              const std::vector<double>& breakpoints) {
    validate_solver(solver);
    check_state(x0, 0, t0);
    if (t0 == t1) return x0;
    for (double b : breakpoints) {
        if (!(std::min(t0, t1) < b && b < std::max(t0, t1))) {
            throw ValidationError("integration breakpoint outside the open interval");
        }
    }
    return rk4_over_cuts(cut_points(t0, t1, breakpoints), solver.steps_per_unit_time, std::move(x0),
                         [&](double t, double mid, const Eigen::VectorXd& x) {
                             // One ulp towards the middle keeps stages at a cut
                             // on the sub-interval's own side of a jump.
                             return rhs(std::nextafter(t, mid), x);
                         });
}

} // namespace chronocalc
