#include "qobs/report.hpp"

#include "json.hpp"

namespace qobs {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
    json data = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            data.push_back(m(i, j));
        }
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index k = 0; k < cols; ++k) {
            m(i, k) = data.at(static_cast<std::size_t>(i * cols + k)).get<double>();
        }
    }
    return m;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return j.at(key).get<T>();
}

json conditions_json(const ConditionReport& c) {
    return {{"tf_cond_ok", c.tf_cond_ok}, {"cjc_ok", c.cjc_ok}, {"rank_ok", c.rank_ok},   {"bound_ok", c.bound_ok},
            {"rank_cr", c.rank_cr},       {"rank_c", c.rank_c}, {"n_p2", c.n_p2},         {"m", c.m},
            {"residuals", c.residuals}};
}

ConditionReport conditions_from(const json& j) {
    ConditionReport c;
    c.tf_cond_ok = j.at("tf_cond_ok").get<bool>();
    c.cjc_ok = j.at("cjc_ok").get<bool>();
    c.rank_ok = j.at("rank_ok").get<bool>();
    c.bound_ok = j.at("bound_ok").get<bool>();
    c.rank_cr = j.at("rank_cr").get<int>();
    c.rank_c = j.at("rank_c").get<int>();
    c.n_p2 = j.at("n_p2").get<int>();
    c.m = j.at("m").get<int>();
    c.residuals = j.at("residuals").get<std::map<std::string, double>>();
    return c;
}

json decomposition_json(const DecompositionSummary& d) {
    return {{"n_p1", d.n_p1},
            {"n_p2", d.n_p2},
            {"r_p11_eigenvalues", d.r_p11_eigenvalues},
            {"theta11_frequencies", d.theta11_frequencies},
            {"theta22_frequencies", d.theta22_frequencies},
            {"transformed_residual", d.transformed_residual},
            {"orthogonality_residual", d.orthogonality_residual},
            {"theta_offdiag_residual", d.theta_offdiag_residual},
            {"r_block_residual", d.r_block_residual},
            {"c_p1_residual", d.c_p1_residual},
            {"controllable", d.controllable},
            {"p", matrix_json(d.p)},
            {"c_p2_tilde", matrix_json(d.c_p2_tilde)}};
}

DecompositionSummary decomposition_from(const json& j) {
    DecompositionSummary d;
    d.n_p1 = j.at("n_p1").get<int>();
    d.n_p2 = j.at("n_p2").get<int>();
    d.r_p11_eigenvalues = j.at("r_p11_eigenvalues").get<std::vector<double>>();
    d.theta11_frequencies = j.at("theta11_frequencies").get<std::vector<double>>();
    d.theta22_frequencies = j.at("theta22_frequencies").get<std::vector<double>>();
    d.transformed_residual = j.at("transformed_residual").get<double>();
    d.orthogonality_residual = j.at("orthogonality_residual").get<double>();
    d.theta_offdiag_residual = j.at("theta_offdiag_residual").get<double>();
    d.r_block_residual = j.at("r_block_residual").get<double>();
    d.c_p1_residual = j.at("c_p1_residual").get<double>();
    d.controllable = j.at("controllable").get<bool>();
    d.p = matrix_from(j.at("p"));
    d.c_p2_tilde = matrix_from(j.at("c_p2_tilde"));
    return d;
}

json observer_json(const ObserverDesign& o) {
    return {{"n_o", o.n_o},
            {"m", o.m},
            {"r_o", matrix_json(o.r_o)},
            {"beta", matrix_json(o.beta)},
            {"c_o", matrix_json(o.c_o)},
            {"r_c_tilde", matrix_json(o.r_c_tilde)},
            {"r_c", matrix_json(o.r_c)},
            {"theta_o", matrix_json(o.theta_o.matrix())},
            {"design_residual", o.design_residual}};
}

ObserverDesign observer_from(const json& j) {
    ObserverDesign o;
    o.n_o = j.at("n_o").get<int>();
    o.m = j.at("m").get<int>();
    o.r_o = matrix_from(j.at("r_o"));
    o.beta = matrix_from(j.at("beta"));
    o.c_o = matrix_from(j.at("c_o"));
    o.r_c_tilde = matrix_from(j.at("r_c_tilde"));
    o.r_c = matrix_from(j.at("r_c"));
    o.theta_o = CommutationMatrix::from_matrix(matrix_from(j.at("theta_o")));
    o.design_residual = j.at("design_residual").get<double>();
    return o;
}

json convergence_json(const ConvergenceReport& c) {
    return {{"zp_drift", c.zp_drift},
            {"final_error", c.final_error},
            {"decay_slope", optional_json(c.decay_slope)},
            {"point_slope", optional_json(c.point_slope)},
            {"sample_times", c.sample_times},
            {"sample_errors", c.sample_errors},
            {"passed", c.passed}};
}

ConvergenceReport convergence_from(const json& j) {
    ConvergenceReport c;
    c.zp_drift = j.at("zp_drift").get<double>();
    c.final_error = j.at("final_error").get<double>();
    c.decay_slope = optional_from<double>(j, "decay_slope");
    c.point_slope = optional_from<double>(j, "point_slope");
    c.sample_times = j.at("sample_times").get<std::vector<double>>();
    c.sample_errors = j.at("sample_errors").get<std::vector<double>>();
    c.passed = j.at("passed").get<bool>();
    return c;
}

}  // namespace

DecompositionSummary summarize(const DecomposedPlant& dec) {
    DecompositionSummary d;
    d.n_p1 = dec.n_p1;
    d.n_p2 = dec.n_p2;
    d.r_p11_eigenvalues = symmetric_eigenvalues(dec.r_p11);
    d.theta11_frequencies = skew_frequencies(dec.theta11);
    d.theta22_frequencies = skew_frequencies(dec.theta22);
    d.transformed_residual = dec.c_p2_tilde.cols() == dec.theta22.rows() ? transformed_condition_check(dec) : 0.0;
    d.orthogonality_residual = dec.orthogonality_residual;
    d.theta_offdiag_residual = dec.theta_offdiag_residual;
    d.r_block_residual = dec.r_block_residual;
    d.c_p1_residual = dec.c_p1_residual;
    d.controllable = dec.controllable;
    d.p = dec.p;
    d.c_p2_tilde = dec.c_p2_tilde;
    return d;
}

std::string report_to_json(const RunReport& report) {
    json j;
    j["command"] = report.command;
    j["exit_code"] = report.exit_code;
    j["error"] = report.error;
    j["conditions"] = report.conditions ? conditions_json(*report.conditions) : json(nullptr);
    j["decomposition"] = report.decomposition ? decomposition_json(*report.decomposition) : json(nullptr);
    j["observer"] = report.observer ? observer_json(*report.observer) : json(nullptr);
    j["convergence"] = report.convergence ? convergence_json(*report.convergence) : json(nullptr);
    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    j["checks"] = checks;
    j["files"] = report.files;
    return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
    const json j = json::parse(text);
    RunReport r;
    r.command = j.at("command").get<std::string>();
    r.exit_code = j.at("exit_code").get<int>();
    r.error = j.at("error").get<std::string>();
    if (!j.at("conditions").is_null()) r.conditions = conditions_from(j.at("conditions"));
    if (!j.at("decomposition").is_null()) r.decomposition = decomposition_from(j.at("decomposition"));
    if (!j.at("observer").is_null()) r.observer = observer_from(j.at("observer"));
    if (!j.at("convergence").is_null()) r.convergence = convergence_from(j.at("convergence"));
    for (const auto& c : j.at("checks")) {
        r.checks.push_back({c.at("name").get<std::string>(), c.at("passed").get<bool>(),
                            c.at("detail").get<std::string>()});
    }
    r.files = j.at("files").get<std::vector<std::string>>();
    return r;
}

}  // namespace qobs
