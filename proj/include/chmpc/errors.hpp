#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace chmpc {

/// An optimal control problem instance has no feasible input sequence.
/// Under the control-invariance assumption this signals misuse (the state
/// left the safe set), so it is an error rather than a normal outcome.
class InfeasibleOcp : public std::runtime_error {
public:
    InfeasibleOcp(std::string what, Eigen::VectorXd state)
        : std::runtime_error(std::move(what)), state_(std::move(state)) {}

    const Eigen::VectorXd& state() const { return state_; }

private:
    Eigen::VectorXd state_;
};

/// Every beta candidate along a trajectory was skipped (near-zero
/// denominators everywhere, e.g. a run started at the equilibrium).
class DegenerateTrajectory : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A barrier that is not affine was passed where an affine half-space
/// must be emitted.
class UnsupportedBarrier : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The QP solver stopped without a certified optimum (iteration limit).
class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Config file could not be parsed or validated; names the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(field) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

}  // namespace chmpc
