#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "chmpc/cbf.hpp"
#include "chmpc/config.hpp"
#include "chmpc/errors.hpp"

using namespace chmpc;

namespace {

AffineBarrier benchmark_h1() {
    Eigen::VectorXd a(4);
    a << 5.0 / 9.0, 1.0, 0.0, 0.0;
    return AffineBarrier(a, 0.5 / 9.0, 0.8);
}

AffineBarrier benchmark_h2() {
    Eigen::VectorXd a(4);
    a << 1.0, -1.0, 0.0, 0.0;
    return AffineBarrier(a, 1.6, 0.8);
}

Eigen::VectorXd state(double px, double py, double vx = 0.0, double vy = 0.0) {
    Eigen::VectorXd x(4);
    x << px, py, vx, vy;
    return x;
}

}  // namespace

TEST_CASE("benchmark barrier values") {
    CHECK(evaluate(benchmark_h1(), state(0, 0)) == doctest::Approx(0.5 / 9.0));
    CHECK(evaluate(benchmark_h2(), state(0, 0)) == doctest::Approx(1.6));
    CHECK(evaluate(benchmark_h1(), state(-0.1, 0)) == doctest::Approx(0.0).scale(1.0));
    CHECK_THROWS_AS(evaluate(benchmark_h1(), Eigen::VectorXd::Zero(3)),
                    std::invalid_argument);
}

TEST_CASE("gamma domain and safe-set witness") {
    Eigen::VectorXd a(1);
    a << 1.0;
    CHECK_THROWS_AS(AffineBarrier(a, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(AffineBarrier(a, 0.0, 1.2), std::invalid_argument);
    CHECK_THROWS_AS(AffineBarrier(a, 0.0, -0.3), std::invalid_argument);
    CHECK_NOTHROW(AffineBarrier(a, 0.0, 1.0));

    AffineBarrier negative_offset(a, -3.0, 0.5);
    CHECK(negative_offset.value(negative_offset.safe_witness()) >= 0.0);

    Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(AffineBarrier(zero, -1.0, 0.5), std::invalid_argument);
}

TEST_CASE("step constraint encodes the decay half-space") {
    // gamma = 0.8: h(x+) >= 0.2 h(x). With concrete endpoints the residual
    // rhs equals b(x+) - 0.2 b(x) exactly.
    AffineBarrier h1 = benchmark_h1();
    std::mt19937 rng(3);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        Eigen::VectorXd x(4), xn(4);
        for (int i = 0; i < 4; ++i) { x(i) = normal(rng); xn(i) = normal(rng); }
        AffineConstraint hs = step_constraint(h1, AffineExpr::constant(x, 0),
                                              AffineExpr::constant(xn, 0));
        CHECK(hs.a.size() == 0);
        CHECK(hs.b == doctest::Approx(h1.value(xn) - 0.2 * h1.value(x)).epsilon(1e-15));
    }

    AffineBarrier full(Eigen::VectorXd::Ones(1), 0.0, 1.0);
    AffineConstraint hs = step_constraint(full, AffineExpr::constant(Eigen::VectorXd::Ones(1), 0),
                                          AffineExpr::constant(Eigen::VectorXd::Ones(1) * 3.0, 0));
    CHECK(hs.b == doctest::Approx(3.0));  // gamma = 1: pure membership of x+
}

TEST_CASE("step constraint over a decision variable") {
    // b(x) = x + 1, gamma = 0.5, x = 1: the emitted half-space is x+ >= 0.
    AffineBarrier b(Eigen::VectorXd::Ones(1), 1.0, 0.5);
    AffineExpr now = AffineExpr::constant(Eigen::VectorXd::Ones(1), 1);
    AffineExpr next{Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1)};
    AffineConstraint hs = step_constraint(b, now, next);
    CHECK(hs.a(0) == doctest::Approx(-1.0));
    CHECK(hs.b == doctest::Approx(0.0).scale(1.0));
    CHECK(hs.violation(Eigen::VectorXd::Constant(1, 0.5)) < 0.0);   // x+ = 0.5 satisfies
    CHECK(hs.violation(Eigen::VectorXd::Constant(1, -0.5)) > 0.0);  // x+ = -0.5 violates
}

TEST_CASE("non-affine barriers are rejected by the constraint generator") {
    struct Quadratic : Barrier {
        double value(const Eigen::VectorXd& x) const override { return 1.0 - x.squaredNorm(); }
    };
    Quadratic q;
    CHECK(q.value(Eigen::VectorXd::Zero(2)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(step_constraint(q, AffineExpr::constant(Eigen::VectorXd::Zero(2), 0),
                                    AffineExpr::constant(Eigen::VectorXd::Zero(2), 0)),
                    UnsupportedBarrier);
}

TEST_CASE("invariance verification") {
    BarrierSet set{{benchmark_h1(), benchmark_h2()}, {}};
    Eigen::VectorXd a_vel(4);
    a_vel << 0, 0, 1, 1;
    set.extra_affine.push_back(AffineConstraint{a_vel, 2.0});

    std::vector<Eigen::VectorXd> at_origin(3, state(0, 0));
    InvarianceReport rep = verify_invariance(set, at_origin);
    CHECK(rep.pass);
    CHECK(rep.min_margin == doctest::Approx(0.5 / 9.0));

    // h1 = -0.1 at one state: fail and report where.
    std::vector<Eigen::VectorXd> traj{state(0, 0),
                                      state(-(0.1 + 0.5 / 9.0) * 9.0 / 5.0, 0.0), state(0, 0)};
    rep = verify_invariance(set, traj);
    CHECK_FALSE(rep.pass);
    CHECK(rep.worst_step == 1);
    CHECK(rep.worst_constraint == 0);
    CHECK(rep.min_margin == doctest::Approx(-0.1));
    CHECK_FALSE(rep.per_constraint_pass[0]);
    CHECK(rep.per_constraint_pass[1]);

    CHECK_THROWS_AS(verify_invariance(set, std::vector<Eigen::VectorXd>{}),
                    std::invalid_argument);
}

TEST_CASE("matrix-of-columns overload matches the vector form") {
    BarrierSet set{{benchmark_h1()}, {}};
    Eigen::MatrixXd states(4, 2);
    states.col(0) = state(0, 0);
    states.col(1) = state(1, 1);
    InvarianceReport a = verify_invariance(set, states);
    InvarianceReport b = verify_invariance(
        set, std::vector<Eigen::VectorXd>{states.col(0), states.col(1)});
    CHECK(a.pass == b.pass);
    CHECK(a.min_margin == b.min_margin);
}
