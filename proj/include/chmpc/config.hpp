#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "chmpc/ocp.hpp"
#include "chmpc/sim.hpp"

namespace chmpc {

/// Everything a run needs, in the shape of the config file. Matrices are
/// written as row lists ([r00 r01; r10 r11]); repeated `barrier` /
/// `affine` keys accumulate.
struct RunConfig {
    // [system] either the preset with dt, or explicit A, B
    std::string preset = "double_integrator";
    double dt = 0.1;
    std::optional<Eigen::MatrixXd> A;
    std::optional<Eigen::MatrixXd> B;

    // [cost]
    Eigen::MatrixXd Q;
    Eigen::MatrixXd R;

    // [input]
    Eigen::VectorXd u_lower;
    Eigen::VectorXd u_upper;

    // [constraints]
    std::vector<AffineBarrier> barriers;
    std::vector<AffineConstraint> state_constraints;

    // [run]
    Eigen::VectorXd x0;
    int N = 20;
    std::optional<int> ntilde;
    std::optional<int> constraint_horizon;
    double eps = 1e-10;
    int max_steps = 2000;
    unsigned seed = 0;

    // [solver]
    double abs_tol = 1e-8;
    double rel_tol = 1e-8;
    double feas_tol = 1e-8;
    int max_iter = 50000;

    bool operator==(const RunConfig& other) const;
};

/// The built-in benchmark: planar double integrator (dt = 0.35), Q = I4,
/// R = I2, |u_r| <= 2, velocity bound |v_x|+|v_y| <= 2 as four half-spaces,
/// the two position barriers with gamma = 0.8, x0 = [-0.8, 0.6, -0.45, 0.65],
/// N = 20, Ntilde = 10. With these weights the certification splits cleanly:
/// constraint horizons below 8 are not applicable, 8 and above are.
RunConfig paper_benchmark();

/// Parse / emit the structured text format. dump_config(parse_config(s))
/// round-trips to an identical RunConfig. Throws ConfigError naming the
/// offending field.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);
std::string dump_config(const RunConfig& cfg);

/// The resolved Ntilde (exactly one of ntilde / constraint_horizon must be
/// set; they determine each other through N).
int resolved_ntilde(const RunConfig& cfg);

/// Validates and lowers a config into the solver-facing types.
OcpSpec make_spec(const RunConfig& cfg);
StopRule make_stop_rule(const RunConfig& cfg);

}  // namespace chmpc
