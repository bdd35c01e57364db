#pragma once

#include "chronocalc/fields.hpp"
#include "chronocalc/flow.hpp"

#include <Eigen/Dense>

namespace chronocalc {

/// The family V + alpha W on [t0, t1]. Derivatives are taken at alpha = 0.
struct PerturbedSystem {
    VectorField base;
    VectorField perturbation;
    double t0 = 0.0;
    double t1 = 0.0;
};

enum class DerivativeFormula {
    /// int P_{tau,t *}(P_{t0,tau}(q)) W_tau(P_{t0,tau}(q)) dtau
    Inner,
    /// P_{t0,t *}(q) int P_{tau,t0 *}(P_{t0,tau}(q)) W_tau(P_{t0,tau}(q)) dtau
    Outer,
};

/// d/d alpha of P^alpha_{t0,t1}(q) at alpha = 0 by Gauss-Legendre in tau.
Eigen::VectorXd param_derivative(const PerturbedSystem& sys, const ChartPoint& q, DerivativeFormula formula,
                                 const FlowSolver& solver, int nodes = 32);

/// Central difference of the perturbed flows, (P^{+eps} - P^{-eps})(q) / (2 eps).
Eigen::VectorXd fd_param_derivative(const PerturbedSystem& sys, const ChartPoint& q, double epsilon,
                                    const FlowSolver& solver);

/// || S_{0,t}(q) - P_{0,t}(C_{0,t}(q)) || where S is the flow of V + W, P the
/// flow of V, and C the flow of the transported field tau -> (P_{tau,0})_* W.
/// In operator order this is S^ = C^ o P^.
double variation_of_parameters_check(const VectorField& v, const VectorField& w, const ChartPoint& q, double t,
                                     const FlowSolver& solver);

} // namespace chronocalc
