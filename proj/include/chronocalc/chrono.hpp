#pragma once

#include "chronocalc/errors.hpp"
#include "chronocalc/fields.hpp"
#include "chronocalc/flow.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

namespace chronocalc {

/// Which route simplex_integral_term takes. Auto uses the closed form
/// (t - t0)^k / k! * (lifted phi)(q) whenever every field is autonomous.
enum class QuadraturePath { Auto, Quadrature };

/// The chronological term
///   int_{t0 <= tau_k <= ... <= tau_1 <= t} (V_k,tau_k ^ o ... o V_1,tau_1 ^)(phi)(q) dtau
/// where fields[0] is lifted first (at the latest time tau_1).
Eigen::VectorXd simplex_integral_term(const std::vector<VectorField>& fields, const Observable& obs,
                                      const ChartPoint& q, double t0, double t, int nodes,
                                      QuadraturePath path = QuadraturePath::Auto);

/// phi(q) + sum_{i=1}^{k-1} of the order-i terms of `field`.
Eigen::VectorXd volterra_truncate(const VectorField& field, const Observable& obs, const ChartPoint& q, double t0,
                                  double t, int k, int nodes);

enum class RemainderMethod {
    /// flow value minus truncation
    Difference,
    /// nested quadrature of the remainder integral itself (k <= 2 only)
    Direct,
};

struct RemainderReport {
    int k = 0;
    double t = 0.0;
    double remainder_norm = 0.0;
    /// C (t - t0)^k / k!, present only when a witness was supplied.
    std::optional<double> bound;
};

RemainderReport remainder_eval(const VectorField& field, const Observable& obs, const ChartPoint& q, double t0,
                               double t, int k, const FlowSolver& solver, int nodes,
                               const std::optional<LocallyBoundedWitness>& witness = std::nullopt,
                               RemainderMethod method = RemainderMethod::Difference);

/// Norms below this are treated as exact zeros by the order probe.
inline constexpr double kProbeZero = 1e-14;

/// Log-log fit of a residual family on the dyadic grid t_j = t_max 2^-j.
struct OrderEstimate {
    std::vector<double> t_grid;
    std::vector<double> norms;
    double fitted_slope = 0.0;
    double r_squared = 0.0;
    /// Grid indices dropped from the fit because their norm is below kProbeZero.
    std::vector<int> excluded;
    /// Fewer than two usable points: the family cancels exactly (to round-off).
    bool degenerate = false;

    int usable_points() const noexcept { return static_cast<int>(norms.size() - excluded.size()); }
    double max_norm() const noexcept;
};

/// Thrown by order_probe when no slope can be fitted. Carries the sampled
/// grid; exact cancellation is the best possible o(t^k) outcome, so callers
/// usually treat this as success.
class DegenerateProbe : public NumericalError {
public:
    explicit DegenerateProbe(OrderEstimate estimate);
    const OrderEstimate& estimate() const noexcept { return estimate_; }

private:
    OrderEstimate estimate_;
};

OrderEstimate order_probe(const std::function<double(double)>& sample, double t_max, int levels);

/// Least-squares slope of log(norm) against log(t). Shared by order_probe and
/// callers that already hold sampled norms.
OrderEstimate fit_order(std::vector<double> t_grid, std::vector<double> norms);

/// || phi(P(q)) - phi(q) - int_{t0}^{t} (V_tau^ phi)(P_{t0,tau}(q)) dtau ||
double integral_equation_residual(const VectorField& field, const Observable& obs, const ChartPoint& q, double t0,
                                  double t, const FlowSolver& solver, int nodes);

} // namespace chronocalc
