#pragma once

#include <Eigen/Core>

#include <memory>
#include <vector>

namespace chmpc {

/// Half-space a'v <= b. The vector it applies to is context dependent:
/// a plant state for OcpSpec constraints, a stacked decision vector for
/// rows emitted by step_constraint after condensing.
struct AffineConstraint {
    Eigen::VectorXd a;
    double b = 0.0;

    double violation(const Eigen::VectorXd& v) const { return a.dot(v) - b; }
};

/// Affine expression v = M z + w of a decision vector z; the condensed
/// representation of a predicted state. A concrete point is M = 0, w = v.
struct AffineExpr {
    Eigen::MatrixXd M;
    Eigen::VectorXd w;

    static AffineExpr constant(const Eigen::VectorXd& v, Eigen::Index decision_dim);
    Eigen::VectorXd at(const Eigen::VectorXd& z) const { return M * z + w; }
};

/// Discrete-time barrier candidate: b(x) >= 0 defines the safe set, the
/// one-step condition b(x+) - b(x) >= -gamma(b(x)) keeps it invariant.
class Barrier {
public:
    virtual ~Barrier() = default;
    virtual double value(const Eigen::VectorXd& x) const = 0;
};

/// Affine barrier b(x) = a'x + c with linear decay gamma(s) = gamma * s,
/// gamma in (0, 1]. Restricting to this class keeps every emitted
/// constraint affine and the OCP a QP.
class AffineBarrier : public Barrier {
public:
    AffineBarrier(Eigen::VectorXd a, double c, double gamma);

    double value(const Eigen::VectorXd& x) const override;

    const Eigen::VectorXd& a() const { return a_; }
    double c() const { return c_; }
    double gamma() const { return gamma_; }

    /// A state with b(x) >= 0, produced at construction; the safe set is
    /// nonempty by witness.
    const Eigen::VectorXd& safe_witness() const { return witness_; }

private:
    Eigen::VectorXd a_;
    double c_;
    double gamma_;
    Eigen::VectorXd witness_;
};

/// Barrier value b(x). Throws std::invalid_argument on dimension mismatch.
double evaluate(const AffineBarrier& b, const Eigen::VectorXd& x);

/// Emits the half-space b(x_next) - (1-gamma) b(x_now) >= 0 as a row over
/// the decision vector the expressions are written in.
AffineConstraint step_constraint(const AffineBarrier& b,
                                 const AffineExpr& x_now,
                                 const AffineExpr& x_next);

/// Generic entry point; throws UnsupportedBarrier unless the barrier is
/// affine (only affine barriers condense to a half-space).
AffineConstraint step_constraint(const Barrier& b,
                                 const AffineExpr& x_now,
                                 const AffineExpr& x_next);

/// The safe set used by the benchmark and the simulator: affine barriers
/// with decay plus plain half-space state constraints (no decay).
struct BarrierSet {
    std::vector<AffineBarrier> barriers;
    std::vector<AffineConstraint> extra_affine;

    /// min over all barrier values and half-space slacks at x; >= 0 means
    /// x is inside every set.
    double min_margin(const Eigen::VectorXd& x) const;
};

struct InvarianceReport {
    bool pass = true;
    double min_margin = 0.0;               // worst margin over the whole trajectory
    Eigen::VectorXd per_step_min;          // min margin per state
    Eigen::MatrixXd margins;               // (#barriers + #half-spaces) x T
    std::vector<bool> per_constraint_pass; // one flag per constraint
    Eigen::Index worst_step = 0;
    Eigen::Index worst_constraint = 0;
};

/// Checks every state of a trajectory against every barrier and half-space.
/// Pass iff all margins >= -feas_tol.
InvarianceReport verify_invariance(const BarrierSet& bs,
                                   const std::vector<Eigen::VectorXd>& trajectory,
                                   double feas_tol = 1e-8);
InvarianceReport verify_invariance(const BarrierSet& bs,
                                   const Eigen::MatrixXd& states_as_columns,
                                   double feas_tol = 1e-8);

}  // namespace chmpc
