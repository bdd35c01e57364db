#pragma once

#include "chronocalc/fields.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace chronocalc {

/// Fixed-step classical Runge-Kutta configuration.
///
/// Each integration interval is split at the field's time breakpoints and every
/// sub-interval of length L is covered by ceil(L * steps_per_unit_time) equal
/// steps, so the step never exceeds 1 / steps_per_unit_time.
struct FlowSolver {
    int steps_per_unit_time = 1000;
    bool breakpoint_splitting = true;
};

/// Coordinates above this magnitude abort an integration with BlowUpError.
inline constexpr double kBlowUpThreshold = 1e12;

/// The flow P_{t0,t1} of a field. t1 < t0 integrates backward in time.
struct FlowMap {
    VectorField field;
    double t0 = 0.0;
    double t1 = 0.0;
    FlowSolver solver{};

    /// Q_{t0,t1} = P_{t1,t0}.
    FlowMap inverse() const { return {field, t1, t0, solver}; }
};

ChartPoint flow_map(const FlowMap& fm, const ChartPoint& q);

/// Differential of the flow at q (solution of the variational equation).
Eigen::MatrixXd flow_pushforward(const FlowMap& fm, const ChartPoint& q);

struct FlowState {
    ChartPoint endpoint;
    Eigen::MatrixXd pushforward;
};
/// Endpoint and differential from one integration; the endpoint is bitwise
/// identical to flow_map's.
FlowState flow_with_pushforward(const FlowMap& fm, const ChartPoint& q);

ChartPoint inverse_flow(const FlowMap& fm, const ChartPoint& q);

/// P^(phi)(q) = phi(P(q)).
Eigen::VectorXd flow_operator_apply(const FlowMap& fm, const Observable& obs, const ChartPoint& q);

/// The transported field F_* V with F a flow map:
///   (F_* V)(r) = F_*(F^{-1}(r)) V_{t_eval}(F^{-1}(r)).
///
/// Numerical, not polynomial: deliberately not convertible to VectorField, so
/// it cannot enter the exact bracket and lift paths.
class PushforwardField {
public:
    PushforwardField(FlowMap transport, VectorField field, double t_eval);

    Eigen::VectorXd operator()(const ChartPoint& r) const;
    int dim() const noexcept { return field_.dim(); }

private:
    FlowMap transport_;
    VectorField field_;
    double t_eval_;
};

PushforwardField pushforward_field(const FlowMap& transport, const VectorField& field, double t_eval);

/// Right-hand side of a general ODE x' = f(t, x).
using OdeRhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

/// Fixed-step RK4 for an arbitrary right-hand side, splitting at `breakpoints`
/// (which must lie between t0 and t1). Same step policy and blow-up check as
/// the field flows.
Eigen::VectorXd integrate_rk4(const OdeRhs& rhs, double t0, double t1, Eigen::VectorXd x0, const FlowSolver& solver,
                              const std::vector<double>& breakpoints = {});

} // namespace chronocalc
