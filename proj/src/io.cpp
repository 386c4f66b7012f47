#include "chmpc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace chmpc {

namespace {

void open_or_throw(std::ofstream& out, const std::string& path) {
    out.open(path, std::ios::binary);  // '\n' line endings on every platform
    if (!out) throw std::runtime_error("cannot open output file: " + path);
}

nlohmann::json json_double(double v) {
    // nlohmann prints non-finite numbers as null; keep them readable instead.
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_trajectory_csv(const std::string& path, const OcpSpec& spec,
                          const ClosedLoopRun& run) {
    std::ofstream out;
    open_or_throw(out, path);

    const Eigen::Index nx = run.states.rows();
    const Eigen::Index m = run.inputs.rows();
    out << "k";
    for (Eigen::Index i = 0; i < nx; ++i) out << ",x" << i;
    for (Eigen::Index i = 0; i < m; ++i) out << ",u" << i;
    out << ",l,V_N";
    for (size_t i = 0; i < spec.cbf_set.size(); ++i) out << ",b" << i;
    out << "\n";

    const Eigen::Index T = run.inputs.cols();
    for (Eigen::Index k = 0; k <= T; ++k) {
        out << k;
        for (Eigen::Index i = 0; i < nx; ++i) out << "," << format_double(run.states(i, k));
        for (Eigen::Index i = 0; i < m; ++i)
            out << "," << (k < T ? format_double(run.inputs(i, k)) : "nan");
        out << "," << (k < T ? format_double(run.stage_costs(k)) : "nan");
        const double v = k < run.open_loop_values.size() ? run.open_loop_values(k)
                                                         : std::nan("");
        out << "," << format_double(v);
        for (const auto& b : spec.cbf_set)
            out << "," << format_double(b.value(run.states.col(k)));
        out << "\n";
    }
}

void write_sweep_csv(const std::string& path, const SweepResult& result) {
    std::ofstream out;
    open_or_throw(out, path);
    out << "N,Ntilde,constraint_horizon,J,beta,alpha,applicable,bound_holds,V0\n";
    for (const auto& cell : result.cells) {
        out << cell.N << ",";
        if (cell.not_applicable) {
            out << "NA," << cell.constraint_horizon << ",NA,NA,NA,NA,NA,NA\n";
            continue;
        }
        out << cell.Ntilde << "," << cell.constraint_horizon << ",";
        if (cell.failed) {
            out << "NA,NA,NA,NA,NA,NA\n";
            continue;
        }
        out << format_double(cell.J) << "," << format_double(cell.report.beta) << ","
            << format_double(cell.report.alpha) << ","
            << (cell.report.applicable ? "true" : "false") << ","
            << (cell.report.bound_holds ? "true" : "false") << ","
            << format_double(cell.report.V0) << "\n";
    }
}

void write_fig2_csv(const std::string& path, const SweepResult& result) {
    std::ofstream out;
    open_or_throw(out, path);
    out << "constraint_horizon,measured_J,bound_V0_over_alpha\n";
    for (const auto& cell : result.cells) {
        if (cell.not_applicable || cell.failed || !cell.report.applicable) continue;
        out << cell.constraint_horizon << "," << format_double(cell.J) << ","
            << format_double(cell.report.V0 / cell.report.alpha) << "\n";
    }
}

namespace {

nlohmann::json report_json_object(const BoundReport& r) {
    nlohmann::json j;
    j["N"] = r.N;
    j["Ntilde"] = r.Ntilde;
    j["constraint_horizon"] = r.N - r.Ntilde;
    j["beta"] = json_double(r.beta);
    j["alpha"] = json_double(r.alpha);
    j["applicable"] = r.applicable;
    j["V0"] = json_double(r.V0);
    j["J"] = json_double(r.J);
    j["bound_holds"] = r.bound_holds;
    j["min_stabilizing_N"] = r.min_stabilizing_N;
    j["degenerate"] = r.degenerate;
    j["fully_constrained"] = r.fully_constrained;
    nlohmann::json margins = nlohmann::json::array();
    for (Eigen::Index k = 0; k < r.per_step_margins.size(); ++k)
        margins.push_back(json_double(r.per_step_margins(k)));
    j["per_step_margins"] = std::move(margins);
    return j;
}

}  // namespace

std::string bound_report_json(const BoundReport& report) {
    return report_json_object(report).dump(2);
}

std::string bound_report_json(const BoundReport& report, const BetaRecord& record) {
    nlohmann::json j = report_json_object(report);
    nlohmann::json rec;
    rec["beta"] = json_double(record.beta);
    rec["beta_min"] = record.beta_min;
    rec["skipped"] = record.skipped;
    rec["samples"] = record.samples();
    nlohmann::json matrix = nlohmann::json::array();
    for (Eigen::Index r = 0; r < record.matrix.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < record.matrix.cols(); ++c)
            row.push_back(json_double(record.matrix(r, c)));
        matrix.push_back(std::move(row));
    }
    rec["matrix"] = std::move(matrix);
    j["beta_record"] = std::move(rec);
    return j.dump(2);
}

}  // namespace chmpc
