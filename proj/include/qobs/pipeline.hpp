#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "qobs/config.hpp"
#include "qobs/observer_synthesis.hpp"
#include "qobs/plant_analysis.hpp"
#include "qobs/report.hpp"

namespace qobs {

inline constexpr double kDefaultHorizon = 100.0;
inline constexpr double kDefaultStep = 0.01;

// Command-line values; each one, when set, wins over the config file.
struct RunOverrides {
    std::optional<double> t_end;
    std::optional<double> dt;
    std::optional<double> omega;
    std::optional<double> tol;
};

struct PreparedPlant {
    QuantumLinearSystem plant;
    DecomposedPlant decomposition;
};

// Builds the plant from c_p, or from c_p2_tilde through realize_output.
[[nodiscard]] PreparedPlant prepare_plant(const PlantConfig& config);

[[nodiscard]] ConditionOptions condition_options(const PlantConfig& config, const RunOverrides& overrides);
[[nodiscard]] ObserverOptions observer_options(const PlantConfig& config, const RunOverrides& overrides);

// The six-mode example: all-ones R_p, outputs [[1,1,1,1],[1,1,-1,-1]] on the
// constant block, observer R_o = I, C_o = I, beta = -I, horizon 200.
[[nodiscard]] PlantConfig six_mode_example_config();

[[nodiscard]] RunReport cmd_analyze(const PlantConfig& config, const RunOverrides& overrides = {});
[[nodiscard]] RunReport cmd_synthesize(const PlantConfig& config, const std::filesystem::path& out_path,
                                       const RunOverrides& overrides = {});
[[nodiscard]] RunReport cmd_simulate(const PlantConfig& config, const std::filesystem::path& out_dir,
                                     const RunOverrides& overrides = {});
[[nodiscard]] RunReport cmd_demo(const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Human-readable summary of a report for the terminal.
[[nodiscard]] std::string format_summary(const RunReport& report);

}  // namespace qobs
