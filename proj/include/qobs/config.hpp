#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "qobs/core_model.hpp"

namespace qobs {

inline constexpr int kConfigFormatVersion = 1;

// Malformed or inconsistent configuration. The message names the source and
// the offending line/column or field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ObserverOverrides {
    std::optional<double> omega;
    std::optional<Matrix> r_o;   // n_o x n_o
    std::optional<Matrix> c_o;   // m x n_o
    std::optional<Matrix> beta;  // n_o x m
    bool zero_coupling = false;
};

struct SimulationSettings {
    std::optional<double> t_end;
    std::optional<double> dt;
};

/// Plant description as read from a config file.
///
/// Outputs are given either directly as c_p (m x n_p) or in the transformed
/// coordinates of the plant decomposition as c_p2_tilde (m x n_p2), in which
/// case C_p = [0, c_p2_tilde] P^T is derived after decomposing R_p. Exactly
/// one of the two is present.
struct PlantConfig {
    int format_version = kConfigFormatVersion;
    int n_p = 0;
    int m = 0;
    Matrix r_p;
    std::optional<Matrix> c_p;
    std::optional<Matrix> c_p2_tilde;
    std::optional<double> tol;
    ObserverOverrides observer;
    SimulationSettings simulation;
};

// Field-by-field equality; matrices compare shape and exact entries.
[[nodiscard]] bool operator==(const PlantConfig& a, const PlantConfig& b);

[[nodiscard]] PlantConfig parse_config(const std::string& text, const std::string& source = "<config>");
[[nodiscard]] PlantConfig load_config(const std::filesystem::path& path);
[[nodiscard]] std::string serialize_config(const PlantConfig& config);

}  // namespace qobs
