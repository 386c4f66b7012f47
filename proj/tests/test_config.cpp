#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chmpc/config.hpp"
#include "chmpc/errors.hpp"
#include "chmpc/io.hpp"

using namespace chmpc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path temp_dir() {
    fs::path dir = fs::temp_directory_path() / "chmpc_config_test";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("benchmark preset carries the published experiment") {
    RunConfig cfg = paper_benchmark();
    REQUIRE(cfg.barriers.size() == 2);
    CHECK(cfg.barriers[0].gamma() == 0.8);
    CHECK(cfg.barriers[0].a()(0) == doctest::Approx(5.0 / 9.0));
    CHECK(cfg.barriers[0].c() == doctest::Approx(0.5 / 9.0));
    CHECK(cfg.barriers[1].c() == doctest::Approx(1.6));
    CHECK(cfg.state_constraints.size() == 4);  // |vx| + |vy| <= 2
    CHECK(cfg.u_upper(0) == 2.0);
    CHECK(cfg.u_lower(1) == -2.0);
    CHECK(cfg.x0(0) == doctest::Approx(-0.8));
    CHECK(cfg.N == 20);
    REQUIRE(cfg.ntilde.has_value());
    CHECK(*cfg.ntilde == 10);
    CHECK_NOTHROW(make_spec(cfg));
}

TEST_CASE("config round-trips through dump and parse") {
    RunConfig cfg = paper_benchmark();
    const std::string text = dump_config(cfg);
    RunConfig reparsed = parse_config(text);
    CHECK(reparsed == cfg);
    CHECK(dump_config(reparsed) == text);

    // Explicit system matrices round-trip as well.
    RunConfig scalar;
    scalar.preset = "none";
    scalar.A = Eigen::MatrixXd::Ones(1, 1);
    scalar.B = Eigen::MatrixXd::Ones(1, 1);
    scalar.Q = Eigen::MatrixXd::Ones(1, 1);
    scalar.R = Eigen::MatrixXd::Ones(1, 1);
    scalar.u_lower = Eigen::VectorXd::Constant(1, -10.0);
    scalar.u_upper = Eigen::VectorXd::Constant(1, 10.0);
    scalar.x0 = Eigen::VectorXd::Ones(1);
    scalar.N = 2;
    scalar.ntilde = 1;
    CHECK(parse_config(dump_config(scalar)) == scalar);
    CHECK_NOTHROW(make_spec(parse_config(dump_config(scalar))));
}

TEST_CASE("horizon bookkeeping") {
    RunConfig cfg = paper_benchmark();
    cfg.constraint_horizon = 5;
    cfg.ntilde.reset();
    CHECK(resolved_ntilde(cfg) == 15);

    cfg.ntilde = 10;  // both set now
    CHECK_THROWS_AS(resolved_ntilde(cfg), ConfigError);
    cfg.ntilde.reset();
    cfg.constraint_horizon.reset();  // neither
    CHECK_THROWS_AS(resolved_ntilde(cfg), ConfigError);
}

TEST_CASE("validation diagnostics name the offending field") {
    RunConfig cfg = paper_benchmark();
    cfg.ntilde = cfg.N;  // Ntilde = N out of range
    try {
        make_spec(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "run.ntilde");
        CHECK(std::string(e.what()).find("Ntilde") != std::string::npos);
    }

    cfg = paper_benchmark();
    cfg.x0 = Eigen::VectorXd::Zero(3);
    try {
        make_spec(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "run.x0");
    }

    cfg = paper_benchmark();
    cfg.Q = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(make_spec(cfg), ConfigError);
}

TEST_CASE("parser rejects malformed input") {
    CHECK_THROWS_AS(parse_config("[system]\npreset"), ConfigError);
    CHECK_THROWS_AS(parse_config("[cost]\nQ = [1 2; 3]"), ConfigError);
    CHECK_THROWS_AS(parse_config("[cost]\nQ = [1 two]"), ConfigError);
    CHECK_THROWS_AS(parse_config("[nowhere]\nx = 1"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nwhat = 1"), ConfigError);
    CHECK_THROWS_AS(parse_config("[constraints]\nbarrier = [1 0] 0.5"), ConfigError);
    CHECK_NOTHROW(parse_config("# comment only\n\n[run]\nN = 5\n"));
}

TEST_CASE("trajectory csv schema and determinism") {
    RunConfig cfg = paper_benchmark();
    cfg.N = 8;
    cfg.ntilde = 4;
    cfg.constraint_horizon.reset();
    OcpSpec spec = make_spec(cfg);
    ClosedLoopRun run = run_closed_loop(spec, cfg.x0, StopRule{1e-10, 20});

    fs::path dir = temp_dir();
    write_trajectory_csv((dir / "a.csv").string(), spec, run);
    write_trajectory_csv((dir / "b.csv").string(), spec, run);
    const std::string a = slurp(dir / "a.csv");
    CHECK(a == slurp(dir / "b.csv"));
    CHECK(a.rfind("k,x0,x1,x2,x3,u0,u1,l,V_N,b0,b1\n", 0) == 0);

    const size_t lines = static_cast<size_t>(std::count(a.begin(), a.end(), '\n'));
    CHECK(lines == static_cast<size_t>(run.states.cols()) + 1);
}

TEST_CASE("sweep and comparison csv schemas") {
    RunConfig cfg = paper_benchmark();
    OcpSpec base = make_spec(cfg);
    SweepResult result = sweep(base, {6}, {3, 7}, cfg.x0);

    fs::path dir = temp_dir();
    write_sweep_csv((dir / "sweep.csv").string(), result);
    write_fig2_csv((dir / "fig2.csv").string(), result);

    const std::string sweep_text = slurp(dir / "sweep.csv");
    CHECK(sweep_text.rfind(
              "N,Ntilde,constraint_horizon,J,beta,alpha,applicable,bound_holds,V0\n",
              0) == 0);
    CHECK(sweep_text.find("6,NA,7,NA") != std::string::npos);  // ch > N-1 cell

    const std::string fig2 = slurp(dir / "fig2.csv");
    CHECK(fig2.rfind("constraint_horizon,measured_J,bound_V0_over_alpha\n", 0) == 0);
}

TEST_CASE("bound report serializes to json") {
    RunConfig cfg = paper_benchmark();
    cfg.N = 8;
    cfg.ntilde = 4;
    cfg.constraint_horizon.reset();
    OcpSpec spec = make_spec(cfg);
    ClosedLoopRun run = run_closed_loop(spec, cfg.x0, StopRule{}, true);
    Certification cert = certify_run(spec, run);

    nlohmann::json j = nlohmann::json::parse(bound_report_json(cert.report, cert.beta_record));
    CHECK(j["N"] == 8);
    CHECK(j["Ntilde"] == 4);
    CHECK(j["constraint_horizon"] == 4);
    CHECK(j["beta"].get<double>() == doctest::Approx(cert.report.beta));
    CHECK(j["applicable"].is_boolean());
    CHECK(j["bound_holds"] == true);
    CHECK(j["per_step_margins"].size() == static_cast<size_t>(run.steps()));
    CHECK(j["beta_record"]["matrix"].size() ==
          static_cast<size_t>(spec.N - spec.Ntilde + 1));
    CHECK(j["beta_record"]["samples"] == static_cast<int>(run.states.cols()));
}
