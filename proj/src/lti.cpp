#include "chmpc/lti.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>
#include <string>

namespace chmpc {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace

DiscreteLTI::DiscreteLTI(Eigen::MatrixXd A, Eigen::MatrixXd B)
    : A_(std::move(A)), B_(std::move(B)) {
    require(A_.rows() >= 1, "DiscreteLTI: state dimension must be >= 1");
    require(A_.rows() == A_.cols(), "DiscreteLTI: A must be square");
    require(B_.cols() >= 1, "DiscreteLTI: input dimension must be >= 1");
    require(B_.rows() == A_.rows(), "DiscreteLTI: B must have as many rows as A");
}

Eigen::VectorXd DiscreteLTI::step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    require(x.size() == state_dim(), "step: state dimension mismatch");
    require(u.size() == input_dim(), "step: input dimension mismatch");
    return A_ * x + B_ * u;
}

DiscreteLTI double_integrator(double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("double_integrator: dt must be > 0");
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(4, 4);
    A(0, 2) = dt;
    A(1, 3) = dt;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(4, 2);
    B(0, 0) = 0.5 * dt * dt;
    B(1, 1) = 0.5 * dt * dt;
    B(2, 0) = dt;
    B(3, 1) = dt;
    return DiscreteLTI(std::move(A), std::move(B));
}

StageCost::StageCost(Eigen::MatrixXd Q, Eigen::MatrixXd R)
    : Q_(std::move(Q)), R_(std::move(R)) {
    require(Q_.rows() == Q_.cols(), "StageCost: Q must be square");
    require(R_.rows() == R_.cols(), "StageCost: R must be square");
    Q_ = 0.5 * (Q_ + Q_.transpose()).eval();
    R_ = 0.5 * (R_ + R_.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qs(Q_, Eigen::EigenvaluesOnly);
    const double qscale = std::max(1.0, Q_.cwiseAbs().maxCoeff());
    require(qs.eigenvalues().minCoeff() >= -1e-10 * qscale,
            "StageCost: Q must be positive semidefinite");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rs(R_, Eigen::EigenvaluesOnly);
    require(rs.eigenvalues().minCoeff() > 1e-10,
            "StageCost: R must be positive definite");
}

double StageCost::evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    require(x.size() == Q_.rows(), "stage cost: state dimension mismatch");
    require(u.size() == R_.rows(), "stage cost: input dimension mismatch");
    return x.dot(Q_ * x) + u.dot(R_ * u);
}

}  // namespace chmpc
