#include <filesystem>
#include <fstream>
#include <iostream>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "qobs/config.hpp"
#include "qobs/pipeline.hpp"
#include "qobs/report.hpp"

namespace {

int finish(const qobs::RunReport& report, const std::string& report_path) {
    std::cout << qobs::format_summary(report);
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) {
            std::cerr << "error: cannot write " << report_path << "\n";
            return qobs::kExitInputError;
        }
        out << qobs::report_to_json(report);
    }
    return report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reduced-order direct coupling coherent observers for closed linear quantum plants"};
    app.require_subcommand(1);

    qobs::RunOverrides overrides;
    std::string config_path;
    std::string out_path;
    std::string report_path;

    auto add_overrides = [&](CLI::App* cmd) {
        cmd->add_option("--t-end", overrides.t_end, "Simulation horizon");
        cmd->add_option("--dt", overrides.dt, "Simulation time step");
        cmd->add_option("--omega", overrides.omega, "Observer stiffness for the default R_o = omega I");
        cmd->add_option("--tol", overrides.tol, "Absolute tolerance for the algebraic plant conditions");
    };

    auto* analyze = app.add_subcommand("analyze", "Check estimability conditions and decompose the plant");
    analyze->add_option("config", config_path, "Plant config (JSON)")->required();
    analyze->add_option("--report", report_path, "Write the run report as JSON");
    add_overrides(analyze);

    auto* synthesize = app.add_subcommand("synthesize", "Construct the observer and write its matrices as CSV");
    synthesize->add_option("config", config_path, "Plant config (JSON)")->required();
    synthesize->add_option("out", out_path, "Output CSV for the observer matrices")->required();
    synthesize->add_option("--report", report_path, "Write the run report as JSON");
    add_overrides(synthesize);

    auto* simulate = app.add_subcommand("simulate", "Simulate plant and observer, write coefficient CSVs");
    simulate->add_option("config", config_path, "Plant config (JSON)")->required();
    simulate->add_option("out_dir", out_path, "Directory for zp.csv, zo.csv, zo_avg.csv, report.json")->required();
    add_overrides(simulate);

    auto* demo = app.add_subcommand("demo", "Run the built-in six-mode example end to end");
    demo->add_option("--out-dir", out_path, "Also write CSVs and report.json here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qobs::kExitInputError;
    }

    try {
        if (*demo) {
            std::optional<std::filesystem::path> dir;
            if (!out_path.empty()) {
                dir = out_path;
            }
            return finish(qobs::cmd_demo(dir), "");
        }
        const qobs::PlantConfig config = qobs::load_config(config_path);
        if (*analyze) {
            return finish(qobs::cmd_analyze(config, overrides), report_path);
        }
        if (*synthesize) {
            return finish(qobs::cmd_synthesize(config, out_path, overrides), report_path);
        }
        return finish(qobs::cmd_simulate(config, out_path, overrides), "");
    } catch (const qobs::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qobs::kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qobs::kExitInputError;
    }
}
