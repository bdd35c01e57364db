#pragma once

#include "chronocalc/chrono.hpp"
#include "chronocalc/fields.hpp"
#include "chronocalc/flow.hpp"

#include <Eigen/Dense>

#include <compare>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace chronocalc {

/// An iterated Lie bracket over field indices, e.g. [[V1,V2],V1].
///
/// Indices are 0-based in the API; the text form counts from V1.
class BracketExpression {
public:
    static BracketExpression leaf(int field_index);
    static BracketExpression pair(BracketExpression left, BracketExpression right);

    /// Grammar: `V<n>` | `[expr,expr]`, n >= 1, whitespace ignored.
    static BracketExpression parse(std::string_view text);
    /// Canonical text without whitespace.
    std::string to_string() const;

    bool is_leaf() const noexcept;
    int field_index() const;
    const BracketExpression& left() const;
    const BracketExpression& right() const;
    int degree() const noexcept;
    int max_field_index() const noexcept;

    /// Total order: by degree, then leaf index, then left and right subtrees.
    /// Canonical expressions have left < right at every pair.
    std::strong_ordering operator<=>(const BracketExpression& other) const;
    bool operator==(const BracketExpression& other) const { return (*this <=> other) == 0; }

    bool is_canonical() const;

private:
    struct Node;
    explicit BracketExpression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Canonical brackets of degree 1..max_degree over `num_fields` generators,
/// ordered by degree then by the expression order.
std::vector<BracketExpression> enumerate_canonical_brackets(int num_fields, int max_degree);

/// One flow of a composed program: run field `field_index` for duration
/// t^time_exponent, backward when sign is -1.
struct FlowSegment {
    int field_index;
    int sign;
    int time_exponent;

    bool operator==(const FlowSegment&) const = default;
};
using FlowBracketProgram = std::vector<FlowSegment>;

/// Leaf -> its flow; [A, B] -> A, B, A^-1, B^-1 executed in that order, i.e.
/// the point map B^-1 o A^-1 o B o A. `time_exponents[i]`, when given, sets
/// the time exponent of field i.
FlowBracketProgram compile_flow_bracket(const BracketExpression& expr, const std::vector<int>& time_exponents = {});
/// The program of the inverse map: reversed, signs flipped.
FlowBracketProgram invert_program(const FlowBracketProgram& program);

/// [V, W] = DW V - DV W as a polynomial.
PolynomialMap lie_bracket_polynomial(const PolynomialMap& v, const PolynomialMap& w);
/// The bracket expression as a polynomial field, fields frozen at time t.
PolynomialMap bracket_polynomial(const BracketExpression& expr, const std::vector<VectorField>& fields, double t);

Eigen::VectorXd lie_bracket(const VectorField& v, const VectorField& w, double t, const ChartPoint& q);
Eigen::VectorXd eval_bracket_expression(const BracketExpression& expr, const std::vector<VectorField>& fields,
                                        double t, const ChartPoint& q);

/// Runs the program from q; every segment flows over [0, t^exponent].
ChartPoint run_flow_program(const FlowBracketProgram& program, const std::vector<VectorField>& fields, double t,
                            const ChartPoint& q, const FlowSolver& solver);

ChartPoint flow_bracket(const BracketExpression& expr, const std::vector<VectorField>& fields, double t,
                        const ChartPoint& q, const FlowSolver& solver);

/// Residual norm of the Ad integral identity
///   (P_{t,0})_* W = W + int_0^t (P_{tau,0})_* [V, W] dtau
/// evaluated at q, for autonomous V and W.
double adjoint_check(const VectorField& v, const VectorField& w, const ChartPoint& q, double t,
                     const FlowSolver& solver, int nodes);

/// Outcome of an o(t^k) probe.
struct AsymptoticsReport {
    OrderEstimate estimate;
    int claimed_order = 0;
    /// Slope the fit had to clear.
    double slope_threshold = 0.0;
    /// Every residual below kExactCancellation.
    bool exact = false;
    bool passed = false;
};

/// Residuals below this on the whole grid count as exact cancellation.
inline constexpr double kExactCancellation = 1e-12;

/// Probes || B(P^1_t, ..., P^k_t)(q) - q - t^k B(X_1, ..., X_k)(q) ||.
/// Passes when the slope exceeds k + 0.5 or the residual cancels exactly.
AsymptoticsReport bracket_asymptotics_check(const BracketExpression& expr, const std::vector<VectorField>& fields,
                                            const ChartPoint& q, double t_max, int levels,
                                            const FlowSolver& solver);

/// Probes || P_t^-1(q) - q + t V(q) ||; passes at slope >= 1.8 or exact cancellation.
AsymptoticsReport inverse_expansion_check(const VectorField& v, const ChartPoint& q, double t_max, int levels,
                                          const FlowSolver& solver);

/// || F_*[V, W](q) - [F_*V, F_*W](q) ||. The left side brackets exactly and
/// transports; the right side brackets the two transported fields with
/// central differences. Fields are evaluated at time 0.
double pushforward_invariance_check(const FlowMap& transport, const VectorField& v, const VectorField& w,
                                    const ChartPoint& q);

/// Pointwise split of the commutator of the flows P (of X) and Q (of Y) over
/// [0, t], applied to phi at q, with V1 = Id - P^-1, V2 = P - Id,
/// W1 = Id - Q^-1, W2 = Q - Id as operators:
///   [P,Q]^ phi = phi - W2 V1 phi + V1 W1 phi + R phi,
///   R = W2 V1 W1 - V2 W2 V1 + V2 V1 W1 + V2 W2 V1 W1.
struct CommutatorDecomposition {
    Eigen::VectorXd composed;     ///< [P,Q]^ phi (q)
    Eigen::VectorXd identity;     ///< phi(q)
    Eigen::VectorXd leading;      ///< (V1 W1 - W2 V1) phi (q)
    Eigen::VectorXd remainder;    ///< R phi (q)
    Eigen::VectorXd bracket_term; ///< t^2 [X,Y]^ phi (q)
};

CommutatorDecomposition commutator_decomposition(const VectorField& x, const VectorField& y, const Observable& obs,
                                                 const ChartPoint& q, double t, const FlowSolver& solver);

} // namespace chronocalc
