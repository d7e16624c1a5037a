#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qobs/core_model.hpp"
#include "qobs/observer_synthesis.hpp"
#include "qobs/plant_analysis.hpp"
#include "qobs/simulation.hpp"

namespace qobs {

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitInputError = 2 };

struct DecompositionSummary {
    int n_p1 = 0;
    int n_p2 = 0;
    std::vector<double> r_p11_eigenvalues;
    std::vector<double> theta11_frequencies;
    std::vector<double> theta22_frequencies;
    double transformed_residual = 0.0;
    double orthogonality_residual = 0.0;
    double theta_offdiag_residual = 0.0;
    double r_block_residual = 0.0;
    double c_p1_residual = 0.0;
    bool controllable = false;
    Matrix p;
    Matrix c_p2_tilde;
};

[[nodiscard]] DecompositionSummary summarize(const DecomposedPlant& dec);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RunReport {
    std::string command;
    std::optional<ConditionReport> conditions;
    std::optional<DecompositionSummary> decomposition;
    std::optional<ObserverDesign> observer;
    std::optional<ConvergenceReport> convergence;
    std::vector<CheckResult> checks;
    std::vector<std::string> files;
    std::string error;
    int exit_code = kExitPass;
};

[[nodiscard]] std::string report_to_json(const RunReport& report);
[[nodiscard]] RunReport report_from_json(const std::string& text);

}  // namespace qobs
