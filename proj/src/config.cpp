#include "chmpc/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "chmpc/errors.hpp"
#include "chmpc/io.hpp"

namespace chmpc {

namespace {

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a.rows() == 0 || (a.array() == b.array()).all());
}

bool same_vector(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.size() == b.size() && (a.size() == 0 || (a.array() == b.array()).all());
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_number_list(const std::string& text, const std::string& field) {
    std::vector<double> out;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
        try {
            size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError(field, "not a number: '" + tok + "'");
        }
    }
    return out;
}

// "[r00 r01; r10 r11]"
Eigen::MatrixXd parse_matrix(const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']')
        throw ConfigError(field, "expected a bracketed matrix, got '" + t + "'");
    const std::string inner = t.substr(1, t.size() - 2);

    std::vector<std::vector<double>> rows;
    std::istringstream is(inner);
    std::string row_text;
    while (std::getline(is, row_text, ';')) {
        auto row = parse_number_list(row_text, field);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError(field, "empty matrix");
    const size_t cols = rows.front().size();
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw ConfigError(field, "ragged matrix rows");
        for (size_t c = 0; c < cols; ++c)
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    return M;
}

Eigen::VectorXd parse_vector(const std::string& text, const std::string& field) {
    Eigen::MatrixXd M = parse_matrix(text, field);
    if (M.rows() != 1 && M.cols() != 1) throw ConfigError(field, "expected a vector");
    return M.rows() == 1 ? Eigen::VectorXd(M.row(0).transpose()) : Eigen::VectorXd(M.col(0));
}

// "[a0 a1 ...] scalar..." -> vector plus trailing scalars
std::pair<Eigen::VectorXd, std::vector<double>> parse_vector_and_scalars(
    const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    const auto close = t.find(']');
    if (t.empty() || t.front() != '[' || close == std::string::npos)
        throw ConfigError(field, "expected '[coefficients] scalars'");
    Eigen::VectorXd v = parse_vector(t.substr(0, close + 1), field);
    std::vector<double> scalars = parse_number_list(t.substr(close + 1), field);
    return {std::move(v), std::move(scalars)};
}

double parse_scalar(const std::string& text, const std::string& field) {
    auto nums = parse_number_list(text, field);
    if (nums.size() != 1) throw ConfigError(field, "expected a single number");
    return nums[0];
}

int parse_int(const std::string& text, const std::string& field) {
    const double v = parse_scalar(text, field);
    if (v != std::floor(v)) throw ConfigError(field, "expected an integer");
    return static_cast<int>(v);
}

std::string dump_vector(const Eigen::VectorXd& v) {
    std::ostringstream os;
    os << "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) os << " ";
        os << format_double(v(i));
    }
    os << "]";
    return os.str();
}

std::string dump_matrix(const Eigen::MatrixXd& M) {
    std::ostringstream os;
    os << "[";
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        if (r) os << "; ";
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            if (c) os << " ";
            os << format_double(M(r, c));
        }
    }
    os << "]";
    return os.str();
}

}  // namespace

bool RunConfig::operator==(const RunConfig& other) const {
    auto same_barriers = [&] {
        if (barriers.size() != other.barriers.size()) return false;
        for (size_t i = 0; i < barriers.size(); ++i) {
            if (!same_vector(barriers[i].a(), other.barriers[i].a()) ||
                barriers[i].c() != other.barriers[i].c() ||
                barriers[i].gamma() != other.barriers[i].gamma())
                return false;
        }
        return true;
    };
    auto same_constraints = [&] {
        if (state_constraints.size() != other.state_constraints.size()) return false;
        for (size_t i = 0; i < state_constraints.size(); ++i) {
            if (!same_vector(state_constraints[i].a, other.state_constraints[i].a) ||
                state_constraints[i].b != other.state_constraints[i].b)
                return false;
        }
        return true;
    };
    return preset == other.preset && dt == other.dt &&
           A.has_value() == other.A.has_value() &&
           (!A || same_matrix(*A, *other.A)) &&
           B.has_value() == other.B.has_value() &&
           (!B || same_matrix(*B, *other.B)) &&
           same_matrix(Q, other.Q) && same_matrix(R, other.R) &&
           same_vector(u_lower, other.u_lower) && same_vector(u_upper, other.u_upper) &&
           same_barriers() && same_constraints() && same_vector(x0, other.x0) &&
           N == other.N && ntilde == other.ntilde &&
           constraint_horizon == other.constraint_horizon && eps == other.eps &&
           max_steps == other.max_steps && seed == other.seed &&
           abs_tol == other.abs_tol && rel_tol == other.rel_tol &&
           feas_tol == other.feas_tol && max_iter == other.max_iter;
}

RunConfig paper_benchmark() {
    RunConfig cfg;
    cfg.preset = "double_integrator";
    cfg.dt = 0.35;
    cfg.Q = Eigen::MatrixXd::Identity(4, 4);
    cfg.R = Eigen::MatrixXd::Identity(2, 2);
    cfg.u_lower = Eigen::VectorXd::Constant(2, -2.0);
    cfg.u_upper = Eigen::VectorXd::Constant(2, 2.0);

    Eigen::VectorXd a1(4), a2(4);
    a1 << 5.0 / 9.0, 1.0, 0.0, 0.0;
    a2 << 1.0, -1.0, 0.0, 0.0;
    cfg.barriers.emplace_back(a1, 0.5 / 9.0, 0.8);
    cfg.barriers.emplace_back(a2, 1.6, 0.8);

    // |v_x| + |v_y| <= 2 as four half-spaces.
    for (double sx : {1.0, -1.0}) {
        for (double sy : {1.0, -1.0}) {
            Eigen::VectorXd a(4);
            a << 0.0, 0.0, sx, sy;
            cfg.state_constraints.push_back(AffineConstraint{a, 2.0});
        }
    }

    cfg.x0 = Eigen::VectorXd(4);
    cfg.x0 << -0.8, 0.6, -0.45, 0.65;
    cfg.N = 20;
    cfg.ntilde = 10;
    return cfg;
}

int resolved_ntilde(const RunConfig& cfg) {
    if (cfg.ntilde.has_value() == cfg.constraint_horizon.has_value())
        throw ConfigError("run.ntilde",
                          "exactly one of ntilde / constraint_horizon must be given");
    if (cfg.ntilde) return *cfg.ntilde;
    return cfg.N - *cfg.constraint_horizon;
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    cfg.preset = "";
    cfg.Q.resize(0, 0);
    cfg.R.resize(0, 0);

    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string field = section + "." + key;

        if (section == "system") {
            if (key == "preset") cfg.preset = value;
            else if (key == "dt") cfg.dt = parse_scalar(value, field);
            else if (key == "A") cfg.A = parse_matrix(value, field);
            else if (key == "B") cfg.B = parse_matrix(value, field);
            else throw ConfigError(field, "unknown key");
        } else if (section == "cost") {
            if (key == "Q") cfg.Q = parse_matrix(value, field);
            else if (key == "R") cfg.R = parse_matrix(value, field);
            else throw ConfigError(field, "unknown key");
        } else if (section == "input") {
            if (key == "lower") cfg.u_lower = parse_vector(value, field);
            else if (key == "upper") cfg.u_upper = parse_vector(value, field);
            else throw ConfigError(field, "unknown key");
        } else if (section == "constraints") {
            if (key == "barrier") {
                auto [a, scalars] = parse_vector_and_scalars(value, field);
                if (scalars.size() != 2)
                    throw ConfigError(field, "expected '[a] c gamma'");
                cfg.barriers.emplace_back(std::move(a), scalars[0], scalars[1]);
            } else if (key == "affine") {
                auto [a, scalars] = parse_vector_and_scalars(value, field);
                if (scalars.size() != 1) throw ConfigError(field, "expected '[a] b'");
                cfg.state_constraints.push_back(AffineConstraint{std::move(a), scalars[0]});
            } else {
                throw ConfigError(field, "unknown key");
            }
        } else if (section == "run") {
            if (key == "x0") cfg.x0 = parse_vector(value, field);
            else if (key == "N") cfg.N = parse_int(value, field);
            else if (key == "ntilde") cfg.ntilde = parse_int(value, field);
            else if (key == "constraint_horizon") cfg.constraint_horizon = parse_int(value, field);
            else if (key == "eps") cfg.eps = parse_scalar(value, field);
            else if (key == "max_steps") cfg.max_steps = parse_int(value, field);
            else if (key == "seed") cfg.seed = static_cast<unsigned>(parse_int(value, field));
            else throw ConfigError(field, "unknown key");
        } else if (section == "solver") {
            if (key == "abs_tol") cfg.abs_tol = parse_scalar(value, field);
            else if (key == "rel_tol") cfg.rel_tol = parse_scalar(value, field);
            else if (key == "feas_tol") cfg.feas_tol = parse_scalar(value, field);
            else if (key == "max_iter") cfg.max_iter = parse_int(value, field);
            else throw ConfigError(field, "unknown key");
        } else {
            throw ConfigError(section.empty() ? key : field, "unknown section");
        }
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot read file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string dump_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "[system]\n";
    if (!cfg.preset.empty()) {
        os << "preset = " << cfg.preset << "\n";
        os << "dt = " << format_double(cfg.dt) << "\n";
    }
    if (cfg.A) os << "A = " << dump_matrix(*cfg.A) << "\n";
    if (cfg.B) os << "B = " << dump_matrix(*cfg.B) << "\n";

    os << "\n[cost]\n";
    os << "Q = " << dump_matrix(cfg.Q) << "\n";
    os << "R = " << dump_matrix(cfg.R) << "\n";

    os << "\n[input]\n";
    os << "lower = " << dump_vector(cfg.u_lower) << "\n";
    os << "upper = " << dump_vector(cfg.u_upper) << "\n";

    if (!cfg.barriers.empty() || !cfg.state_constraints.empty()) {
        os << "\n[constraints]\n";
        for (const auto& b : cfg.barriers)
            os << "barrier = " << dump_vector(b.a()) << " " << format_double(b.c()) << " "
               << format_double(b.gamma()) << "\n";
        for (const auto& c : cfg.state_constraints)
            os << "affine = " << dump_vector(c.a) << " " << format_double(c.b) << "\n";
    }

    os << "\n[run]\n";
    os << "x0 = " << dump_vector(cfg.x0) << "\n";
    os << "N = " << cfg.N << "\n";
    if (cfg.ntilde) os << "ntilde = " << *cfg.ntilde << "\n";
    if (cfg.constraint_horizon) os << "constraint_horizon = " << *cfg.constraint_horizon << "\n";
    os << "eps = " << format_double(cfg.eps) << "\n";
    os << "max_steps = " << cfg.max_steps << "\n";
    os << "seed = " << cfg.seed << "\n";

    os << "\n[solver]\n";
    os << "abs_tol = " << format_double(cfg.abs_tol) << "\n";
    os << "rel_tol = " << format_double(cfg.rel_tol) << "\n";
    os << "feas_tol = " << format_double(cfg.feas_tol) << "\n";
    os << "max_iter = " << cfg.max_iter << "\n";
    return os.str();
}

OcpSpec make_spec(const RunConfig& cfg) {
    const bool preset_system = cfg.preset == "double_integrator";
    if (!preset_system && cfg.preset != "" && cfg.preset != "none")
        throw ConfigError("system.preset", "unknown preset '" + cfg.preset + "'");
    if (cfg.A.has_value() != cfg.B.has_value())
        throw ConfigError("system.B", "A and B must be given together");
    if (!preset_system && !cfg.A)
        throw ConfigError("system.A", "explicit A and B required without a preset");
    if (preset_system && !(cfg.dt > 0.0))
        throw ConfigError("system.dt", "dt must be > 0");

    DiscreteLTI sys = preset_system && !cfg.A
                          ? double_integrator(cfg.dt)
                          : DiscreteLTI(*cfg.A, *cfg.B);
    const Eigen::Index nx = sys.state_dim();
    const Eigen::Index m = sys.input_dim();

    if (cfg.Q.rows() != nx || cfg.Q.cols() != nx)
        throw ConfigError("cost.Q", "must be " + std::to_string(nx) + "x" + std::to_string(nx));
    if (cfg.R.rows() != m || cfg.R.cols() != m)
        throw ConfigError("cost.R", "must be " + std::to_string(m) + "x" + std::to_string(m));
    if (cfg.u_lower.size() != m || cfg.u_upper.size() != m)
        throw ConfigError("input.lower", "input bounds must have length " + std::to_string(m));
    if (cfg.x0.size() != nx)
        throw ConfigError("run.x0", "must have length " + std::to_string(nx));
    for (size_t i = 0; i < cfg.barriers.size(); ++i)
        if (cfg.barriers[i].a().size() != nx)
            throw ConfigError("constraints.barrier", "barrier " + std::to_string(i) +
                                                         " dimension mismatch");
    for (size_t i = 0; i < cfg.state_constraints.size(); ++i)
        if (cfg.state_constraints[i].a.size() != nx)
            throw ConfigError("constraints.affine", "constraint " + std::to_string(i) +
                                                        " dimension mismatch");

    const int ntilde = resolved_ntilde(cfg);
    if (cfg.N < 2) throw ConfigError("run.N", "N must be >= 2");
    if (ntilde < 1 || ntilde > cfg.N - 1)
        throw ConfigError(cfg.ntilde ? "run.ntilde" : "run.constraint_horizon",
                          "1 <= Ntilde <= N-1 required");
    if (!(cfg.eps > 0.0)) throw ConfigError("run.eps", "eps must be > 0");
    if (cfg.max_steps < 1) throw ConfigError("run.max_steps", "max_steps must be >= 1");
    if (cfg.max_iter < 1) throw ConfigError("solver.max_iter", "max_iter must be >= 1");
    if (!(cfg.feas_tol > 0.0)) throw ConfigError("solver.feas_tol", "feas_tol must be > 0");

    OcpSpec spec{
        std::move(sys),
        StageCost(cfg.Q, cfg.R),
        cfg.N,
        ntilde,
        InputBox{cfg.u_lower, cfg.u_upper},
        cfg.state_constraints,
        cfg.barriers,
    };
    spec.feas_tol = cfg.feas_tol;
    spec.qp.abs_tol = cfg.abs_tol;
    spec.qp.rel_tol = cfg.rel_tol;
    spec.qp.feas_tol = cfg.feas_tol;
    spec.qp.max_iter = cfg.max_iter;
    spec.validate();
    return spec;
}

StopRule make_stop_rule(const RunConfig& cfg) {
    return StopRule{cfg.eps, cfg.max_steps};
}

}  // namespace chmpc
