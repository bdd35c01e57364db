#pragma once

#include "chronocalc/errors.hpp"
#include "chronocalc/fields.hpp"
#include "chronocalc/flow.hpp"
#include "chronocalc/liealg.hpp"

#include <Eigen/Dense>

#include <vector>

namespace chronocalc {

/// q' = sum_i u_i(t) V_i(q) with finitely many autonomous polynomial fields.
class AffineControlSystem {
public:
    explicit AffineControlSystem(std::vector<VectorField> fields);

    const std::vector<VectorField>& fields() const noexcept { return fields_; }
    int dim() const noexcept { return fields_.front().dim(); }
    int size() const noexcept { return static_cast<int>(fields_.size()); }

private:
    std::vector<VectorField> fields_;
};

/// One piece of an admissible control: u_{field_index} = sign, all other
/// components zero, for `duration`.
struct ControlSegment {
    int field_index; ///< 0-based
    int sign;        ///< +1 or -1
    double duration; ///< > 0

    bool operator==(const ControlSegment&) const = default;
};

class ControlSchedule {
public:
    ControlSchedule() = default;
    /// Validates admissibility of every segment.
    explicit ControlSchedule(std::vector<ControlSegment> segments);

    const std::vector<ControlSegment>& segments() const noexcept { return segments_; }
    bool empty() const noexcept { return segments_.empty(); }
    double total_duration() const noexcept;

    void append(const ControlSchedule& other);
    static ControlSchedule concat(const ControlSchedule& a, const ControlSchedule& b);

    bool operator==(const ControlSchedule&) const = default;

private:
    std::vector<ControlSegment> segments_;
};

ChartPoint simulate_schedule(const AffineControlSystem& sys, const ChartPoint& q0, const ControlSchedule& schedule,
                             const FlowSolver& solver);

struct RankReport {
    std::vector<BracketExpression> brackets;
    std::vector<Eigen::VectorXd> values;
    int numerical_rank = 0;
    /// Descending.
    std::vector<double> singular_values;
};

/// Evaluates every canonical bracket up to max_degree at q and counts the
/// singular values above rel_tol times the largest.
RankReport bracket_rank(const AffineControlSystem& sys, const ChartPoint& q, int max_degree, double rel_tol = 1e-8);

/// Schedule whose net displacement is approximately sign * magnitude * B(q):
/// the flow-bracket program of expr (reversed for sign -1) with every segment
/// lasting magnitude^(1/k).
ControlSchedule bracket_motion(const AffineControlSystem& sys, const BracketExpression& expr, double magnitude,
                               int sign);

struct PlanResult {
    ControlSchedule schedule;
    ChartPoint endpoint;
    double residual = 0.0;
    int iterations = 0;
};

struct PlannerOptions {
    double step_fraction = 0.5;
    int max_halvings = 20;
    double rel_tol = 1e-8;
};

/// Raised when the greedy loop stops improving; carries the best schedule found.
class StalledError : public NumericalError {
public:
    StalledError(const std::string& what, PlanResult best) : NumericalError(what), best_(std::move(best)) {}
    const PlanResult& best() const noexcept { return best_; }

private:
    PlanResult best_;
};

/// Greedy bracket-motion planner. Each iteration solves a least-squares
/// problem for the residual in the canonical bracket basis at the current
/// point and executes the largest-coefficient direction as a bracket motion.
/// The reported endpoint comes from re-simulating the whole schedule.
PlanResult plan_reach(const AffineControlSystem& sys, const ChartPoint& q0, const ChartPoint& target, double epsilon,
                      int max_degree, int max_iters, const FlowSolver& solver, const PlannerOptions& options = {});

} // namespace chronocalc
