#include "chronocalc/paramflow.hpp"

#include "chronocalc/errors.hpp"
#include "chronocalc/quadrature.hpp"

#include <vector>

namespace chronocalc {

namespace {

void check_system(const PerturbedSystem& sys, const ChartPoint& q) {
    if (sys.base.dim() != sys.perturbation.dim() || sys.base.dim() != q.dim()) {
        throw DimensionError("perturbed system dimension mismatch");
    }
    if (!sys.base.covers(sys.t0, sys.t1) || !sys.perturbation.covers(sys.t0, sys.t1)) {
        throw TimeWindowError("perturbed system interval leaves a field's time window");
    }
}

std::vector<double> joint_breakpoints(const VectorField& a, const VectorField& b, double t0, double t1) {
    auto out = a.breakpoints_between(t0, t1);
    const auto more = b.breakpoints_between(t0, t1);
    out.insert(out.end(), more.begin(), more.end());
    return cuts_between(out, t0, t1);
}

} // namespace

Eigen::VectorXd param_derivative(const PerturbedSystem& sys, const ChartPoint& q, DerivativeFormula formula,
                                 const FlowSolver& solver, int nodes) {
    check_system(sys, q);
    if (sys.t0 == sys.t1) return Eigen::VectorXd::Zero(q.dim());
    const GaussLegendreRule rule = gauss_legendre(nodes);
    const auto cuts = joint_breakpoints(sys.base, sys.perturbation, sys.t0, sys.t1);

    if (formula == DerivativeFormula::Inner) {
        return integrate(rule, sys.t0, sys.t1, cuts, [&](double tau) -> Eigen::VectorXd {
            const ChartPoint p = flow_map(FlowMap{sys.base, sys.t0, tau, solver}, q);
            return flow_pushforward(FlowMap{sys.base, tau, sys.t1, solver}, p) * eval_field(sys.perturbation, tau, p);
        });
    }
    const Eigen::VectorXd pulled = integrate(rule, sys.t0, sys.t1, cuts, [&](double tau) -> Eigen::VectorXd {
        const ChartPoint p = flow_map(FlowMap{sys.base, sys.t0, tau, solver}, q);
        return flow_pushforward(FlowMap{sys.base, tau, sys.t0, solver}, p) * eval_field(sys.perturbation, tau, p);
    });
    return flow_pushforward(FlowMap{sys.base, sys.t0, sys.t1, solver}, q) * pulled;
}

Eigen::VectorXd fd_param_derivative(const PerturbedSystem& sys, const ChartPoint& q, double epsilon,
                                    const FlowSolver& solver) {
    check_system(sys, q);
    if (!(epsilon > 0.0)) throw ValidationError("finite-difference epsilon must be positive");
    const VectorField plus = VectorField::combine(1.0, sys.base, epsilon, sys.perturbation);
    const VectorField minus = VectorField::combine(1.0, sys.base, -epsilon, sys.perturbation);
    const ChartPoint a = flow_map(FlowMap{plus, sys.t0, sys.t1, solver}, q);
    const ChartPoint b = flow_map(FlowMap{minus, sys.t0, sys.t1, solver}, q);
    return (a.coords() - b.coords()) / (2.0 * epsilon);
}

double variation_of_parameters_check(const VectorField& v, const VectorField& w, const ChartPoint& q, double t,
                                     const FlowSolver& solver) {
    if (v.dim() != w.dim() || v.dim() != q.dim()) throw DimensionError("variation of parameters dimension mismatch");
    if (!v.covers(0.0, t) || !w.covers(0.0, t)) throw TimeWindowError("interval leaves a field's time window");

    const ChartPoint direct = flow_map(FlowMap{VectorField::combine(1.0, v, 1.0, w), 0.0, t, solver}, q);

    // C solves r' = (P_{tau,0})_* W_tau (r), starting at q.
    const OdeRhs transported = [&](double tau, const Eigen::VectorXd& r) -> Eigen::VectorXd {
        return pushforward_field(FlowMap{v, tau, 0.0, solver}, w, tau)(ChartPoint(r));
    };
    const Eigen::VectorXd c_end =
        integrate_rk4(transported, 0.0, t, q.coords(), solver, joint_breakpoints(v, w, 0.0, t));
    const ChartPoint composed = flow_map(FlowMap{v, 0.0, t, solver}, ChartPoint(c_end));
    return (direct.coords() - composed.coords()).norm();
}

} // namespace chronocalc
