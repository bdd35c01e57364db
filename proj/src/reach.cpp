#include "chronocalc/reach.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace chronocalc {

AffineControlSystem::AffineControlSystem(std::vector<VectorField> fields) : fields_(std::move(fields)) {
    if (fields_.empty()) throw ValidationError("a control system needs at least one field");
    for (const auto& f : fields_) {
        if (f.dim() != fields_.front().dim()) throw DimensionError("control fields live on different spaces");
        if (!f.is_autonomous()) throw ValidationError("control fields must be autonomous");
    }
}

ControlSchedule::ControlSchedule(std::vector<ControlSegment> segments) : segments_(std::move(segments)) {
    for (const auto& s : segments_) {
        if (s.field_index < 0) throw IndexError("schedule segment has a negative field index");
        if (s.sign != 1 && s.sign != -1) throw ValidationError("admissible controls take values +1 or -1");
        if (!(s.duration > 0.0) || !std::isfinite(s.duration)) {
            throw ValidationError("schedule segment durations must be positive and finite");
        }
    }
}

double ControlSchedule::total_duration() const noexcept {
    double total = 0.0;
    for (const auto& s : segments_) total += s.duration;
    return total;
}

void ControlSchedule::append(const ControlSchedule& other) {
    segments_.insert(segments_.end(), other.segments_.begin(), other.segments_.end());
}

ControlSchedule ControlSchedule::concat(const ControlSchedule& a, const ControlSchedule& b) {
    ControlSchedule out = a;
    out.append(b);
    return out;
}

ChartPoint simulate_schedule(const AffineControlSystem& sys, const ChartPoint& q0, const ControlSchedule& schedule,
                             const FlowSolver& solver) {
    if (q0.dim() != sys.dim()) throw DimensionError("start point does not match the system dimension");
    ChartPoint p = q0;
    const auto& segs = schedule.segments();
    for (std::size_t s = 0; s < segs.size(); ++s) {
        const ControlSegment& seg = segs[s];
        if (seg.field_index >= sys.size()) {
            throw IndexError("schedule segment " + std::to_string(s) + " uses V" + std::to_string(seg.field_index + 1) +
                             " but the system has " + std::to_string(sys.size()) + " fields");
        }
        const FlowMap fm{sys.fields()[static_cast<std::size_t>(seg.field_index)], 0.0, seg.duration, solver};
        try {
            p = seg.sign > 0 ? flow_map(fm, p) : inverse_flow(fm, p);
        } catch (const BlowUpError& e) {
            throw BlowUpError(std::string(e.what()) + " in segment " + std::to_string(s), e.step(), e.time(),
                              static_cast<int>(s));
        }
    }
    return p;
}

namespace {

struct BracketBasis {
    std::vector<BracketExpression> exprs;
    std::vector<PolynomialMap> polys;

    Eigen::MatrixXd columns_at(const ChartPoint& q) const {
        Eigen::MatrixXd m(q.dim(), static_cast<Eigen::Index>(polys.size()));
        for (std::size_t i = 0; i < polys.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = polys[i](q.coords());
        return m;
    }
};

BracketBasis make_basis(const AffineControlSystem& sys, int max_degree) {
    BracketBasis basis;
    basis.exprs = enumerate_canonical_brackets(sys.size(), max_degree);
    for (const auto& e : basis.exprs) basis.polys.push_back(bracket_polynomial(e, sys.fields(), 0.0));
    return basis;
}

RankReport rank_of(const BracketBasis& basis, const ChartPoint& q, double rel_tol) {
    RankReport report;
    report.brackets = basis.exprs;
    const Eigen::MatrixXd cols = basis.columns_at(q);
    for (Eigen::Index i = 0; i < cols.cols(); ++i) report.values.emplace_back(cols.col(i));
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(cols.transpose());
    const Eigen::VectorXd s = svd.singularValues();
    report.singular_values.assign(s.data(), s.data() + s.size());
    const double largest = s.size() > 0 ? s[0] : 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (largest > 0.0 && s[i] > rel_tol * largest) ++report.numerical_rank;
    }
    return report;
}

} // namespace

RankReport bracket_rank(const AffineControlSystem& sys, const ChartPoint& q, int max_degree, double rel_tol) {
    if (max_degree < 1) throw ValidationError("max_degree must be at least 1");
    if (q.dim() != sys.dim()) throw DimensionError("rank point does not match the system dimension");
    if (!(rel_tol > 0.0)) throw ValidationError("rel_tol must be positive");
    return rank_of(make_basis(sys, max_degree), q, rel_tol);
}

ControlSchedule bracket_motion(const AffineControlSystem& sys, const BracketExpression& expr, double magnitude,
                               int sign) {
    if (!(magnitude > 0.0) || !std::isfinite(magnitude)) throw ValidationError("motion magnitude must be positive");
    if (sign != 1 && sign != -1) throw ValidationError("motion sign must be +1 or -1");
    if (expr.max_field_index() >= sys.size()) throw IndexError("bracket refers to a field outside the system");
    const double t = std::pow(magnitude, 1.0 / expr.degree());
    FlowBracketProgram program = compile_flow_bracket(expr);
    if (sign < 0) program = invert_program(program);
    std::vector<ControlSegment> segs;
    segs.reserve(program.size());
    for (const auto& p : program) segs.push_back({p.field_index, p.sign, std::pow(t, p.time_exponent)});
    return ControlSchedule(std::move(segs));
}

PlanResult plan_reach(const AffineControlSystem& sys, const ChartPoint& q0, const ChartPoint& target, double epsilon,
                      int max_degree, int max_iters, const FlowSolver& solver, const PlannerOptions& options) {
    if (q0.dim() != sys.dim() || target.dim() != sys.dim()) throw DimensionError("planner points do not match the system");
    if (!(epsilon > 0.0)) throw ValidationError("planner epsilon must be positive");
    if (max_iters < 0) throw ValidationError("max_iters must be nonnegative");
    if (max_degree < 1) throw ValidationError("max_degree must be at least 1");

    const BracketBasis basis = make_basis(sys, max_degree);
    const RankReport rank = rank_of(basis, q0, options.rel_tol);
    if (rank.numerical_rank < sys.dim()) {
        throw PlannerPreconditionError("brackets up to degree " + std::to_string(max_degree) + " have rank " +
                                       std::to_string(rank.numerical_rank) + " < " + std::to_string(sys.dim()) +
                                       " at the start point");
    }

    ControlSchedule schedule;
    ChartPoint current = q0;
    double residual = (target.coords() - q0.coords()).norm();
    double fraction = options.step_fraction;
    int halvings = 0;
    int iterations = 0;

    auto finish = [&]() {
        const ChartPoint endpoint = simulate_schedule(sys, q0, schedule, solver);
        const double r = (target.coords() - endpoint.coords()).norm();
        return PlanResult{schedule, endpoint, r, iterations};
    };

    while (residual > epsilon && iterations < max_iters) {
        ++iterations;
        const Eigen::MatrixXd cols = basis.columns_at(current);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(cols, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(options.rel_tol);
        const Eigen::VectorXd coef = svd.solve(Eigen::VectorXd(target.coords() - current.coords()));

        Eigen::Index best = 0;
        coef.cwiseAbs().maxCoeff(&best);
        const double a = coef[best];
        if (a == 0.0) break;
        const ControlSchedule motion =
            bracket_motion(sys, basis.exprs[static_cast<std::size_t>(best)], fraction * std::abs(a), a > 0 ? 1 : -1);
        const ChartPoint candidate = simulate_schedule(sys, current, motion, solver);
        const double r = (target.coords() - candidate.coords()).norm();
        if (r < residual) {
            schedule.append(motion);
            current = candidate;
            residual = r;
            fraction = options.step_fraction;
            halvings = 0;
        } else {
            fraction *= 0.5;
            if (++halvings >= options.max_halvings) {
                throw StalledError("planner made no progress after " + std::to_string(halvings) +
                                       " consecutive step halvings",
                                   finish());
            }
        }
    }
    return finish();
}

} // namespace chronocalc
