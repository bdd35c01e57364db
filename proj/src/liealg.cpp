#include "chronocalc/liealg.hpp"

#include "chronocalc/errors.hpp"
#include "chronocalc/numdiff.hpp"
#include "chronocalc/quadrature.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <string>

namespace chronocalc {

namespace {

void check_fields(const BracketExpression& expr, const std::vector<VectorField>& fields) {
    if (expr.max_field_index() >= static_cast<int>(fields.size())) {
        throw IndexError("bracket expression " + expr.to_string() + " refers to V" +
                         std::to_string(expr.max_field_index() + 1) + " but only " + std::to_string(fields.size()) +
                         " fields are defined");
    }
    for (const auto& f : fields) {
        if (f.dim() != fields.front().dim()) throw DimensionError("bracket fields live on different spaces");
    }
}

double time_power(double t, int exponent) { return std::pow(t, exponent); }

} // namespace

PolynomialMap lie_bracket_polynomial(const PolynomialMap& v, const PolynomialMap& w) {
    return w.directional_derivative(v) - v.directional_derivative(w);
}

PolynomialMap bracket_polynomial(const BracketExpression& expr, const std::vector<VectorField>& fields, double t) {
    check_fields(expr, fields);
    if (expr.is_leaf()) return fields[static_cast<std::size_t>(expr.field_index())].at_time(t);
    return lie_bracket_polynomial(bracket_polynomial(expr.left(), fields, t),
                                  bracket_polynomial(expr.right(), fields, t));
}

Eigen::VectorXd lie_bracket(const VectorField& v, const VectorField& w, double t, const ChartPoint& q) {
    if (v.dim() != w.dim() || v.dim() != q.dim()) throw DimensionError("lie_bracket dimension mismatch");
    return field_jacobian(w, t, q) * eval_field(v, t, q) - field_jacobian(v, t, q) * eval_field(w, t, q);
}

Eigen::VectorXd eval_bracket_expression(const BracketExpression& expr, const std::vector<VectorField>& fields,
                                        double t, const ChartPoint& q) {
    check_fields(expr, fields);
    if (q.dim() != fields.front().dim()) throw DimensionError("bracket evaluated at a point of the wrong dimension");
    if (expr.is_leaf()) return eval_field(fields[static_cast<std::size_t>(expr.field_index())], t, q);
    return bracket_polynomial(expr, fields, t)(q.coords());
}

ChartPoint run_flow_program(const FlowBracketProgram& program, const std::vector<VectorField>& fields, double t,
                            const ChartPoint& q, const FlowSolver& solver) {
    ChartPoint p = q;
    for (std::size_t s = 0; s < program.size(); ++s) {
        const FlowSegment& seg = program[s];
        if (seg.field_index < 0 || seg.field_index >= static_cast<int>(fields.size())) {
            throw IndexError("program segment refers to V" + std::to_string(seg.field_index + 1));
        }
        const FlowMap fm{fields[static_cast<std::size_t>(seg.field_index)], 0.0, time_power(t, seg.time_exponent),
                         solver};
        try {
            p = seg.sign > 0 ? flow_map(fm, p) : inverse_flow(fm, p);
        } catch (const BlowUpError& e) {
            throw BlowUpError(std::string(e.what()) + " in segment " + std::to_string(s), e.step(), e.time(),
                              static_cast<int>(s));
        }
    }
    return p;
}

ChartPoint flow_bracket(const BracketExpression& expr, const std::vector<VectorField>& fields, double t,
                        const ChartPoint& q, const FlowSolver& solver) {
    check_fields(expr, fields);
    return run_flow_program(compile_flow_bracket(expr), fields, t, q, solver);
}

double adjoint_check(const VectorField& v, const VectorField& w, const ChartPoint& q, double t,
                     const FlowSolver& solver, int nodes) {
    if (!v.is_autonomous() || !w.is_autonomous()) throw ValidationError("adjoint_check needs autonomous fields");
    if (v.dim() != w.dim() || v.dim() != q.dim()) throw DimensionError("adjoint_check dimension mismatch");
    if (t == 0.0) return 0.0;
    const VectorField bracket = VectorField::autonomous(lie_bracket_polynomial(v.at_time(0.0), w.at_time(0.0)));
    const Eigen::VectorXd lhs = pushforward_field(FlowMap{v, t, 0.0, solver}, w, 0.0)(q);
    const Eigen::VectorXd integral =
        integrate(gauss_legendre(nodes), 0.0, t, {}, [&](double tau) -> Eigen::VectorXd {
            return pushforward_field(FlowMap{v, tau, 0.0, solver}, bracket, 0.0)(q);
        });
    return (lhs - eval_field(w, 0.0, q) - integral).norm();
}

namespace {

AsymptoticsReport run_probe(const std::function<double(double)>& residual, double t_max, int levels, int order,
                            double threshold, bool strict) {
    AsymptoticsReport report;
    report.claimed_order = order;
    report.slope_threshold = threshold;
    try {
        report.estimate = order_probe(residual, t_max, levels);
    } catch (const DegenerateProbe& e) {
        report.estimate = e.estimate();
    }
    report.exact = report.estimate.max_norm() < kExactCancellation;
    const double slope = report.estimate.fitted_slope;
    const bool slope_ok = !report.estimate.degenerate && (strict ? slope > threshold : slope >= threshold);
    report.passed = report.exact || report.estimate.degenerate || slope_ok;
    return report;
}

} // namespace

AsymptoticsReport bracket_asymptotics_check(const BracketExpression& expr, const std::vector<VectorField>& fields,
                                            const ChartPoint& q, double t_max, int levels,
                                            const FlowSolver& solver) {
    check_fields(expr, fields);
    const int k = expr.degree();
    for (const auto& f : fields) {
        if (k > f.smoothness_order()) {
            throw ValidationError("bracket degree " + std::to_string(k) + " exceeds the fields' smoothness order");
        }
    }
    const FlowBracketProgram program = compile_flow_bracket(expr);
    const Eigen::VectorXd direction = eval_bracket_expression(expr, fields, 0.0, q);
    auto residual = [&](double t) {
        const ChartPoint p = run_flow_program(program, fields, t, q, solver);
        return (p.coords() - q.coords() - std::pow(t, k) * direction).norm();
    };
    return run_probe(residual, t_max, levels, k, k + 0.5, true);
}

AsymptoticsReport inverse_expansion_check(const VectorField& v, const ChartPoint& q, double t_max, int levels,
                                          const FlowSolver& solver) {
    const Eigen::VectorXd velocity = eval_field(v, 0.0, q);
    auto residual = [&](double t) {
        const ChartPoint p = inverse_flow(FlowMap{v, 0.0, t, solver}, q);
        return (p.coords() - q.coords() + t * velocity).norm();
    };
    return run_probe(residual, t_max, levels, 1, 1.8, false);
}

double pushforward_invariance_check(const FlowMap& transport, const VectorField& v, const VectorField& w,
                                    const ChartPoint& q) {
    if (v.dim() != w.dim() || v.dim() != q.dim()) throw DimensionError("pushforward_invariance_check dimension mismatch");
    const VectorField bracket = VectorField::autonomous(lie_bracket_polynomial(v.at_time(0.0), w.at_time(0.0)));
    const Eigen::VectorXd lhs = pushforward_field(transport, bracket, 0.0)(q);

    const PushforwardField fv = pushforward_field(transport, v, 0.0);
    const PushforwardField fw = pushforward_field(transport, w, 0.0);
    auto as_vec = [](const PushforwardField& f) {
        return [&f](const Eigen::VectorXd& x) { return f(ChartPoint(x)); };
    };
    const Eigen::MatrixXd dv = central_jacobian(as_vec(fv), q.coords());
    const Eigen::MatrixXd dw = central_jacobian(as_vec(fw), q.coords());
    const Eigen::VectorXd rhs = dw * fv(q) - dv * fw(q);
    return (lhs - rhs).norm();
}

namespace {

enum class Step { P, Pinv, Q, Qinv };
using Word = std::vector<Step>;
/// Linear combination of composition operators. The word w1 w2 ... acts on phi
/// as phi o ... o F_{w2} o F_{w1}: the point meets w1 first.
using OperatorSum = std::vector<std::pair<double, Word>>;

OperatorSum compose(const OperatorSum& a, const OperatorSum& b) {
    OperatorSum out;
    for (const auto& [ca, wa] : a) {
        for (const auto& [cb, wb] : b) {
            Word w = wa;
            w.insert(w.end(), wb.begin(), wb.end());
            out.emplace_back(ca * cb, std::move(w));
        }
    }
    return out;
}

OperatorSum compose(std::initializer_list<OperatorSum> ops) {
    OperatorSum out{{1.0, {}}};
    for (const auto& op : ops) out = compose(out, op);
    return out;
}

OperatorSum plus(OperatorSum a, const OperatorSum& b, double sign = 1.0) {
    for (const auto& [c, w] : b) a.emplace_back(sign * c, w);
    return a;
}

} // namespace

CommutatorDecomposition commutator_decomposition(const VectorField& x, const VectorField& y, const Observable& obs,
                                                 const ChartPoint& q, double t, const FlowSolver& solver) {
    if (x.dim() != y.dim() || x.dim() != q.dim() || obs.dim_in() != q.dim()) {
        throw DimensionError("commutator_decomposition dimension mismatch");
    }
    const FlowMap p_flow{x, 0.0, t, solver};
    const FlowMap q_flow{y, 0.0, t, solver};

    std::map<Word, ChartPoint> points;
    points.emplace(Word{}, q);
    std::function<const ChartPoint&(const Word&)> point_of = [&](const Word& w) -> const ChartPoint& {
        if (auto it = points.find(w); it != points.end()) return it->second;
        const Word prefix(w.begin(), w.end() - 1);
        const ChartPoint& base = point_of(prefix);
        ChartPoint next = base;
        switch (w.back()) {
        case Step::P: next = flow_map(p_flow, base); break;
        case Step::Pinv: next = inverse_flow(p_flow, base); break;
        case Step::Q: next = flow_map(q_flow, base); break;
        case Step::Qinv: next = inverse_flow(q_flow, base); break;
        }
        return points.emplace(w, std::move(next)).first->second;
    };
    auto apply = [&](const OperatorSum& op) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(obs.dim_out());
        for (const auto& [c, w] : op) sum += c * obs(point_of(w));
        return sum;
    };

    const OperatorSum id{{1.0, {}}};
    const OperatorSum v1{{1.0, {}}, {-1.0, {Step::Pinv}}};
    const OperatorSum v2{{1.0, {Step::P}}, {-1.0, {}}};
    const OperatorSum w1{{1.0, {}}, {-1.0, {Step::Qinv}}};
    const OperatorSum w2{{1.0, {Step::Q}}, {-1.0, {}}};

    const OperatorSum leading = plus(compose({v1, w1}), compose({w2, v1}), -1.0);
    OperatorSum remainder = compose({w2, v1, w1});
    remainder = plus(remainder, compose({v2, w2, v1}), -1.0);
    remainder = plus(remainder, compose({v2, v1, w1}));
    remainder = plus(remainder, compose({v2, w2, v1, w1}));

    CommutatorDecomposition out;
    out.composed = apply({{1.0, {Step::P, Step::Q, Step::Pinv, Step::Qinv}}});
    out.identity = apply(id);
    out.leading = apply(leading);
    out.remainder = apply(remainder);
    const Eigen::VectorXd bracket = lie_bracket(x, y, 0.0, q);
    out.bracket_term = t * t * (obs.map.jacobian(q.coords()) * bracket);
    return out;
}

} // namespace chronocalc
