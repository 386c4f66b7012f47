#pragma once

#include <Eigen/Core>

namespace chmpc {

/// Discrete-time linear system x(k+1) = A x(k) + B u(k).
///
/// The origin is an equilibrium by construction, which is the setting the
/// rest of the toolkit (positive definite stage cost, convergence to 0)
/// relies on.
class DiscreteLTI {
public:
    DiscreteLTI(Eigen::MatrixXd A, Eigen::MatrixXd B);

    Eigen::Index state_dim() const { return A_.rows(); }
    Eigen::Index input_dim() const { return B_.cols(); }

    const Eigen::MatrixXd& A() const { return A_; }
    const Eigen::MatrixXd& B() const { return B_; }

    /// One dynamics step A x + B u. Throws std::invalid_argument on
    /// dimension mismatch.
    Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

private:
    Eigen::MatrixXd A_;
    Eigen::MatrixXd B_;
};

/// Exact zero-order-hold double integrator in the plane.
/// State [p_x, p_y, v_x, v_y], input [a_x, a_y].
DiscreteLTI double_integrator(double dt);

/// Quadratic stage cost l(x,u) = x'Qx + u'Ru with Q symmetric positive
/// semidefinite and R symmetric positive definite. Inputs are symmetrized;
/// definiteness is checked at construction.
class StageCost {
public:
    StageCost(Eigen::MatrixXd Q, Eigen::MatrixXd R);

    const Eigen::MatrixXd& Q() const { return Q_; }
    const Eigen::MatrixXd& R() const { return R_; }

    double evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

private:
    Eigen::MatrixXd Q_;
    Eigen::MatrixXd R_;
};

inline double stage_cost(const StageCost& c, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) {
    return c.evaluate(x, u);
}

}  // namespace chmpc
