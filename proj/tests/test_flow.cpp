#include "chronocalc/catalog.hpp"
#include "chronocalc/errors.hpp"
#include "chronocalc/flow.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace chronocalc;
using testkit::Gen;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const FlowSolver kSolver{1000, true};

VectorXd endpoint(const VectorField& f, double t0, double t1, const ChartPoint& q, FlowSolver s = kSolver) {
    return flow_map(FlowMap{f, t0, t1, s}, q).coords();
}

} // namespace

TEST(Flow, RotationQuarterTurn) {
    const VectorXd r = endpoint(catalog::rotation2d(), 0.0, std::numbers::pi / 2, ChartPoint({1.0, 0.0}));
    EXPECT_LT((r - VectorXd{{0.0, 1.0}}).norm(), 1e-8);
}

TEST(Flow, HeisenbergClosedForm) {
    const VectorXd r = endpoint(catalog::heisenberg_v1(), 0.0, 1.0, ChartPoint({0.0, 1.0, 0.0}));
    EXPECT_LT((r - VectorXd{{1.0, 1.0, -0.5}}).norm(), 1e-12);
    Gen g(21);
    for (int i = 0; i < 20; ++i) {
        const ChartPoint q = g.point(3, 2.0);
        const double t = g.uniform(-1.0, 1.0);
        EXPECT_LT((endpoint(catalog::heisenberg_v2(), 0.0, t, q) - testkit::heisenberg_v2_flow(q.coords(), t)).norm(),
                  1e-12);
    }
}

TEST(Flow, ZeroLengthIntervalIsIdentity) {
    const ChartPoint q({0.3, -0.2});
    EXPECT_EQ(endpoint(catalog::rotation2d(), 0.7, 0.7, q), q.coords());
}

TEST(Flow, FourthOrderConvergence) {
    const VectorField f = catalog::rotation2d();
    const ChartPoint q({1.0, 0.0});
    const double t = std::numbers::pi / 2;
    const VectorXd exact = testkit::rotation_flow(q.coords(), t);
    const double e1 = (endpoint(f, 0, t, q, {20, true}) - exact).norm();
    const double e2 = (endpoint(f, 0, t, q, {40, true}) - exact).norm();
    EXPECT_GT(e1 / e2, 8.0);
    EXPECT_LT(e1 / e2, 32.0);
}

TEST(Flow, AgreesWithIndependentIntegrator) {
    Gen g(22);
    for (int trial = 0; trial < 10; ++trial) {
        const VectorField f = g.field(3, 2, 0.5);
        const ChartPoint q = g.point(3, 0.5);
        const VectorXd ref = testkit::oracle_flow(f, 0.0, 0.6, q.coords());
        EXPECT_LT((endpoint(f, 0.0, 0.6, q) - ref).norm(), 1e-9);
    }
}

TEST(Flow, PiecewiseAgreesWithIndependentIntegrator) {
    const VectorField f = testkit::piecewise_field();
    const ChartPoint q({0.4, -0.3});
    for (double t1 : {0.3, 0.5, 0.9, 1.2, 2.0}) {
        EXPECT_LT((endpoint(f, 0.0, t1, q) - testkit::oracle_flow(f, 0.0, t1, q.coords())).norm(), 1e-10);
    }
    EXPECT_LT((endpoint(f, 1.7, 0.1, q) - testkit::oracle_flow(f, 1.7, 0.1, q.coords())).norm(), 1e-10);
}

TEST(Flow, PiecewiseEqualsConcatenationOfPieces) {
    const VectorField f = testkit::piecewise_field();
    const ChartPoint q({0.4, -0.3});
    ChartPoint p = q;
    for (const auto& piece : f.pieces()) {
        p = flow_map(FlowMap{VectorField::autonomous(piece.map), piece.begin, piece.end, kSolver}, p);
    }
    EXPECT_LT((endpoint(f, 0.0, 2.0, q) - p.coords()).norm(), 1e-12);
}

TEST(Flow, SemigroupAndInverse) {
    Gen g(23);
    const std::vector<VectorField> fields{catalog::rotation2d(), catalog::heisenberg_v1(), testkit::piecewise_field()};
    for (const auto& f : fields) {
        for (int i = 0; i < 20; ++i) {
            const ChartPoint q = g.point(f.dim(), 1.0);
            const double t1 = g.uniform(0.0, 0.7);
            const double t2 = g.uniform(t1, 1.4);
            const double t3 = g.uniform(t2, 2.0);
            const ChartPoint mid = flow_map(FlowMap{f, t1, t2, kSolver}, q);
            const VectorXd two_step = flow_map(FlowMap{f, t2, t3, kSolver}, mid).coords();
            EXPECT_LT((two_step - endpoint(f, t1, t3, q)).norm(), 1e-8);
            const FlowMap fm{f, t1, t3, kSolver};
            EXPECT_LT((inverse_flow(fm, flow_map(fm, q)).coords() - q.coords()).norm(), 1e-8);
        }
    }
}

TEST(Flow, PushforwardMatchesFiniteDifferences) {
    Gen g(24);
    const std::vector<VectorField> fields{catalog::rotation2d(), catalog::heisenberg_v1(), testkit::piecewise_field(),
                                          g.field(2, 2, 0.5)};
    for (const auto& f : fields) {
        const FlowMap fm{f, 0.1, 0.9, kSolver};
        const ChartPoint q = g.point(f.dim(), 0.5);
        const MatrixXd fd = testkit::fd_jacobian(
            [&](const VectorXd& x) { return flow_map(fm, ChartPoint(x)).coords(); }, q.coords(), 1e-3);
        EXPECT_LT((flow_pushforward(fm, q) - fd).cwiseAbs().maxCoeff(), 1e-7);
        const FlowState s = flow_with_pushforward(fm, q);
        EXPECT_EQ(s.endpoint.coords(), flow_map(fm, q).coords());
    }
}

TEST(Flow, ChainRuleForPushforwards) {
    const VectorField f = catalog::heisenberg_v1();
    const ChartPoint q({0.2, 0.4, -0.1});
    const FlowMap a{f, 0.0, 0.3, kSolver};
    const FlowMap b{f, 0.3, 0.8, kSolver};
    const MatrixXd composed = flow_pushforward(b, flow_map(a, q)) * flow_pushforward(a, q);
    EXPECT_LT((composed - flow_pushforward(FlowMap{f, 0.0, 0.8, kSolver}, q)).norm(), 1e-10);
}

TEST(Flow, OperatorApplyComposesObservable) {
    const FlowMap fm{catalog::rotation2d(), 0.0, 0.4, kSolver};
    const ChartPoint q({1.0, 2.0});
    const Observable x2 = Observable::coordinate(2, 1);
    EXPECT_NEAR(flow_operator_apply(fm, x2, q)[0], flow_map(fm, q)[1], 1e-15);
}

TEST(Flow, BlowUpIsReported) {
    // x' = x^2 from x = 1 escapes at t = 1.
    const VectorField f = VectorField::autonomous(PolynomialMap(1, {{{1.0, {2}}}}));
    try {
        flow_map(FlowMap{f, 0.0, 2.0, kSolver}, ChartPoint({1.0}));
        FAIL() << "expected BlowUpError";
    } catch (const BlowUpError& e) {
        EXPECT_GT(e.step(), 0);
        EXPECT_LT(e.time(), 1.01);
    }
}

TEST(Flow, ValidationErrors) {
    EXPECT_THROW(flow_map(FlowMap{catalog::rotation2d(), 0, 1, {0, true}}, ChartPoint({1.0, 0.0})), ValidationError);
    EXPECT_THROW(flow_map(FlowMap{catalog::rotation2d(), 0, 1, kSolver}, ChartPoint({1.0, 0.0, 0.0})),
                 DimensionError);
    EXPECT_THROW(flow_map(FlowMap{testkit::piecewise_field(), 0, 3, kSolver}, ChartPoint({1.0, 0.0})),
                 TimeWindowError);
}

TEST(Flow, PushforwardFieldOfLinearFlow) {
    // F = rotation by s: F_* V for the constant field e1 is the rotated constant.
    const double s = 0.7;
    const FlowMap rot{catalog::rotation2d(), 0.0, s, kSolver};
    const PushforwardField pf = pushforward_field(rot, catalog::constant(VectorXd{{1.0, 0.0}}), 0.0);
    const VectorXd v = pf(ChartPoint({0.3, 0.9}));
    EXPECT_LT((v - VectorXd{{std::cos(s), std::sin(s)}}).norm(), 1e-10);
}

TEST(Flow, IntegrateRk4RespectsBreakpoints) {
    // x' = 1 on t < 0.5 and 0 afterwards.
    const OdeRhs rhs = [](double t, const VectorXd&) { return VectorXd::Constant(1, t < 0.5 ? 1.0 : 0.0); };
    const VectorXd x = integrate_rk4(rhs, 0.0, 1.0, VectorXd::Zero(1), {7, true}, {0.5});
    EXPECT_NEAR(x[0], 0.5, 1e-14);
    EXPECT_THROW(integrate_rk4(rhs, 0.0, 1.0, VectorXd::Zero(1), kSolver, {1.5}), ValidationError);
}
