#include "qobs/pipeline.hpp"

#include <cmath>
#include <fstream>

#include <fmt/core.h>

#include "qobs/csv_io.hpp"
#include "qobs/simulation.hpp"

namespace qobs {
namespace {

// Runs body, turning malformed-input exceptions into exit code 2 and
// synthesis refusals into exit code 1.
template <typename Body>
RunReport guarded(const char* command, Body&& body) {
    RunReport report;
    report.command = command;
    try {
        body(report);
    } catch (const SynthesisError& e) {
        report.error = e.what();
        if (e.report()) {
            report.conditions = *e.report();
        }
        report.exit_code = kExitCheckFailed;
    } catch (const ConfigError& e) {
        report.error = e.what();
        report.exit_code = kExitInputError;
    } catch (const std::invalid_argument& e) {
        report.error = e.what();
        report.exit_code = kExitInputError;
    }
    return report;
}

double resolved_horizon(const PlantConfig& config, const RunOverrides& overrides) {
    return overrides.t_end.value_or(config.simulation.t_end.value_or(kDefaultHorizon));
}

double resolved_step(const PlantConfig& config, const RunOverrides& overrides) {
    return overrides.dt.value_or(config.simulation.dt.value_or(kDefaultStep));
}

ObserverDesign build_observer(const PlantConfig& config, const RunOverrides& overrides, const PreparedPlant& prep) {
    ObserverDesign obs = synthesize_observer(prep.plant, prep.decomposition, observer_options(config, overrides));
    return config.observer.zero_coupling ? without_coupling(std::move(obs)) : obs;
}

void write_report_file(RunReport& report, const std::filesystem::path& path) {
    report.files.push_back(path.string());
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    }
    out << report_to_json(report);
}

std::string fmt_list(const std::vector<double>& v) {
    std::string out = "{";
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += fmt::format("{}{:.6g}", i ? ", " : "", std::abs(v[i]) < 1e-12 ? 0.0 : v[i]);
    }
    return out + "}";
}

bool close_lists(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > tol) {
            return false;
        }
    }
    return true;
}

Matrix row_major(int rows, int cols, std::initializer_list<double> values) {
    Matrix m(rows, cols);
    auto it = values.begin();
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            m(i, j) = *it++;
        }
    }
    return m;
}

}  // namespace

PreparedPlant prepare_plant(const PlantConfig& config) {
    const CommutationMatrix theta(config.n_p / 2);
    if (config.c_p2_tilde) {
        RealizedPlant realized = realize_output(theta, config.r_p, *config.c_p2_tilde);
        return {std::move(realized.plant), std::move(realized.decomposition)};
    }
    if (!config.c_p) {
        throw ConfigError("config has no output matrix");
    }
    QuantumLinearSystem plant{theta, config.r_p, *config.c_p};
    validate(plant);
    DecomposedPlant dec = decompose_plant(plant);
    return {std::move(plant), std::move(dec)};
}

ConditionOptions condition_options(const PlantConfig& config, const RunOverrides& overrides) {
    ConditionOptions opts;
    opts.tol_cond = overrides.tol.value_or(config.tol.value_or(kConditionTol));
    return opts;
}

ObserverOptions observer_options(const PlantConfig& config, const RunOverrides& overrides) {
    ObserverOptions opts;
    opts.omega = overrides.omega.value_or(config.observer.omega.value_or(1.0));
    opts.r_o = config.observer.r_o;
    opts.c_o = config.observer.c_o;
    opts.beta = config.observer.beta;
    opts.conditions = condition_options(config, overrides);
    return opts;
}

PlantConfig six_mode_example_config() {
    PlantConfig cfg;
    cfg.n_p = 6;
    cfg.m = 2;
    cfg.r_p = Matrix::Ones(6, 6);
    cfg.c_p2_tilde = row_major(2, 4, {1, 1, 1, 1, 1, 1, -1, -1});
    cfg.observer.r_o = Matrix::Identity(2, 2);
    cfg.observer.c_o = Matrix::Identity(2, 2);
    cfg.observer.beta = -Matrix::Identity(2, 2);
    cfg.simulation.t_end = 200.0;
    cfg.simulation.dt = 0.01;
    return cfg;
}

RunReport cmd_analyze(const PlantConfig& config, const RunOverrides& overrides) {
    return guarded("analyze", [&](RunReport& report) {
        const PreparedPlant prep = prepare_plant(config);
        report.conditions = check_plant_conditions(prep.plant, condition_options(config, overrides));
        report.decomposition = summarize(prep.decomposition);
        report.exit_code = report.conditions->all_ok() ? kExitPass : kExitCheckFailed;
    });
}

RunReport cmd_synthesize(const PlantConfig& config, const std::filesystem::path& out_path,
                         const RunOverrides& overrides) {
    return guarded("synthesize", [&](RunReport& report) {
        const PreparedPlant prep = prepare_plant(config);
        report.conditions = check_plant_conditions(prep.plant, condition_options(config, overrides));
        report.decomposition = summarize(prep.decomposition);
        const ObserverDesign obs = build_observer(config, overrides, prep);
        report.observer = obs;
        report.checks.push_back({"design_equation", obs.design_residual <= kDesignTol,
                                 fmt::format("|-C_o R_o^-1 beta - I| = {:.3e}", obs.design_residual)});

        std::ofstream out(out_path);
        if (!out) {
            throw std::runtime_error(fmt::format("cannot write {}", out_path.string()));
        }
        write_matrix_bundle(out, {{"r_o", obs.r_o},
                                  {"r_c", obs.r_c},
                                  {"r_c_tilde", obs.r_c_tilde},
                                  {"c_o", obs.c_o},
                                  {"beta", obs.beta},
                                  {"theta_o", obs.theta_o.matrix()},
                                  {"c_p", prep.plant.c}});
        report.files.push_back(out_path.string());
        report.exit_code = kExitPass;
    });
}

RunReport cmd_simulate(const PlantConfig& config, const std::filesystem::path& out_dir,
                       const RunOverrides& overrides) {
    return guarded("simulate", [&](RunReport& report) {
        const double t_end = resolved_horizon(config, overrides);
        const double dt = resolved_step(config, overrides);
        if (!(t_end >= 10.0) || !std::isfinite(t_end)) {
            throw ConfigError(fmt::format("simulation horizon t_end must be at least 10, got {}", t_end));
        }
        if (!(dt > 0.0) || dt > t_end / 64.0) {
            throw ConfigError(fmt::format("simulation step dt must be in (0, t_end/64], got {}", dt));
        }

        const PreparedPlant prep = prepare_plant(config);
        report.conditions = check_plant_conditions(prep.plant, condition_options(config, overrides));
        report.decomposition = summarize(prep.decomposition);
        const ObserverDesign obs = build_observer(config, overrides, prep);
        report.observer = obs;

        const AugmentedSystem aug = assemble_augmented(prep.plant, obs);
        const TrajectoryRecord rec = propagate(aug, uniform_grid(t_end, dt));
        report.convergence = time_average_error(rec, aug);
        report.checks.push_back({"ccr_preserved", rec.ccr_residual <= 1e-8,
                                 fmt::format("max |Phi Theta Phi^T - Theta| = {:.3e}", rec.ccr_residual)});

        std::filesystem::create_directories(out_dir);
        write_coefficient_csv(out_dir / "zp.csv", 'p', rec.times, rec.zp_coeffs);
        write_coefficient_csv(out_dir / "zo.csv", 'o', rec.times, rec.zo_coeffs);
        write_coefficient_csv(out_dir / "zo_avg.csv", 'o', rec.times, rec.zo_avg);
        for (const char* name : {"zp.csv", "zo.csv", "zo_avg.csv"}) {
            report.files.push_back((out_dir / name).string());
        }
        report.exit_code = report.convergence->passed && report.checks.back().passed ? kExitPass : kExitCheckFailed;
        write_report_file(report, out_dir / "report.json");
    });
}

RunReport cmd_demo(const std::optional<std::filesystem::path>& out_dir) {
    return guarded("demo", [&](RunReport& report) {
        const PlantConfig config = six_mode_example_config();
        const PreparedPlant prep = prepare_plant(config);
        const DecomposedPlant& dec = prep.decomposition;
        report.conditions = check_plant_conditions(prep.plant);
        report.decomposition = summarize(dec);
        const DecompositionSummary& sum = *report.decomposition;
        auto check = [&](std::string name, bool ok, std::string detail) {
            report.checks.push_back({std::move(name), ok, std::move(detail)});
        };

        check("rank of [R_p, Theta_p R_p] is 2", report.conditions->rank_cr == 2,
              fmt::format("rank = {}", report.conditions->rank_cr));
        check("block sizes n_p1 = 2, n_p2 = 4", dec.n_p1 == 2 && dec.n_p2 == 4,
              fmt::format("n_p1 = {}, n_p2 = {}", dec.n_p1, dec.n_p2));
        check("eig(R_p11) = {0, 6}", close_lists(sum.r_p11_eigenvalues, {0.0, 6.0}, 1e-9),
              fmt_list(sum.r_p11_eigenvalues));
        check("Theta11 ~ J, Theta22 ~ diag(J, -J)",
              close_lists(sum.theta11_frequencies, {-1.0, 1.0}, 1e-9) &&
                  close_lists(sum.theta22_frequencies, {-1.0, -1.0, 1.0, 1.0}, 1e-9),
              fmt::format("{} / {}", fmt_list(sum.theta11_frequencies), fmt_list(sum.theta22_frequencies)));
        check("estimability conditions hold", report.conditions->all_ok(),
              fmt::format("tf {:.2e}, cjc {:.2e}", report.conditions->residuals.at("tf_cond"),
                          report.conditions->residuals.at("cjc")));

        const ObserverDesign obs = build_observer(config, {}, prep);
        report.observer = obs;
        const Matrix expected_rc = row_major(4, 2, {-1, -1, -1, -1, -1, 1, -1, 1});
        check("R_c tilde matches [[-1,-1],[-1,-1],[-1,1],[-1,1]]",
              obs.r_c_tilde.rows() == 4 && obs.r_c_tilde.cols() == 2 && obs.r_c_tilde == expected_rc,
              fmt::format("max deviation {:.1e}", obs.r_c_tilde.rows() == 4 && obs.r_c_tilde.cols() == 2
                                                      ? max_abs(obs.r_c_tilde - expected_rc)
                                                      : INFINITY));
        check("design equation -C_o R_o^-1 beta = I", obs.design_residual == 0.0,
              fmt::format("residual {:.1e}", obs.design_residual));

        const AugmentedSystem aug = assemble_augmented(prep.plant, obs);
        const TrajectoryRecord rec = propagate(aug, uniform_grid(*config.simulation.t_end, *config.simulation.dt));
        report.convergence = time_average_error(rec, aug);
        const ConvergenceReport& conv = *report.convergence;
        check("z_p coefficients constant", conv.zp_drift <= 1e-6, fmt::format("drift {:.2e}", conv.zp_drift));
        check("time-average error decays like 1/T",
              conv.decay_slope && *conv.decay_slope >= -1.3 && *conv.decay_slope <= -0.7,
              conv.decay_slope ? fmt::format("slope {:.3f}", *conv.decay_slope) : std::string("no slope"));

        const TrajectoryRecord oracle = ode_oracle(aug, 50.0, 1e-3);
        TrajectoryRecord head;
        const std::size_t k50 = 5000;
        head.times = {rec.times[k50]};
        head.zp_coeffs = {rec.zp_coeffs[k50]};
        head.zo_coeffs = {rec.zo_coeffs[k50]};
        const double deviation = record_deviation(head, oracle);
        check("RK4 oracle agrees at t = 50", deviation <= 1e-6, fmt::format("max deviation {:.2e}", deviation));

        if (out_dir) {
            std::filesystem::create_directories(*out_dir);
            write_coefficient_csv(*out_dir / "zp.csv", 'p', rec.times, rec.zp_coeffs);
            write_coefficient_csv(*out_dir / "zo.csv", 'o', rec.times, rec.zo_coeffs);
            write_coefficient_csv(*out_dir / "zo_avg.csv", 'o', rec.times, rec.zo_avg);
            for (const char* name : {"zp.csv", "zo.csv", "zo_avg.csv"}) {
                report.files.push_back((*out_dir / name).string());
            }
        }
        bool all = true;
        for (const auto& c : report.checks) {
            all = all && c.passed;
        }
        report.exit_code = all ? kExitPass : kExitCheckFailed;
        if (out_dir) {
            write_report_file(report, *out_dir / "report.json");
        }
    });
}

std::string format_summary(const RunReport& report) {
    std::string out = fmt::format("== {} ==\n", report.command);
    if (report.conditions) {
        const auto& c = *report.conditions;
        auto flag = [](bool ok) { return ok ? "ok" : "FAIL"; };
        out += fmt::format("conditions: tf_cond {} ({:.2e})  cjc {} ({:.2e})  rank {} ({} of {})  bound {} "
                           "(m = {}, n_p2 = {})\n",
                           flag(c.tf_cond_ok), c.residuals.at("tf_cond"), flag(c.cjc_ok), c.residuals.at("cjc"),
                           flag(c.rank_ok), c.rank_c, c.m, flag(c.bound_ok), c.m, c.n_p2);
        out += fmt::format("rank [R_p, Theta_p R_p] = {}\n", c.rank_cr);
    }
    if (report.decomposition) {
        const auto& d = *report.decomposition;
        out += fmt::format("decomposition: n_p1 = {}, n_p2 = {}, eig(R_p11) = {}, controllable = {}\n", d.n_p1,
                           d.n_p2, fmt_list(d.r_p11_eigenvalues), d.controllable ? "yes" : "no");
        out += fmt::format("  theta11 frequencies {}, theta22 frequencies {}\n", fmt_list(d.theta11_frequencies),
                           fmt_list(d.theta22_frequencies));
    }
    if (report.observer) {
        const auto& o = *report.observer;
        out += fmt::format("observer: n_o = {}, design residual = {:.2e}\n", o.n_o, o.design_residual);
    }
    if (report.convergence) {
        const auto& c = *report.convergence;
        out += fmt::format("convergence: zp drift = {:.2e}, final error = {:.4e}, decay slope = {}, {}\n",
                           c.zp_drift, c.final_error,
                           c.decay_slope ? fmt::format("{:.3f}", *c.decay_slope) : std::string("n/a"),
                           c.passed ? "passed" : "FAILED");
    }
    for (const auto& c : report.checks) {
        out += fmt::format("[{}] {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
    }
    for (const auto& f : report.files) {
        out += fmt::format("wrote {}\n", f);
    }
    if (!report.error.empty()) {
        out += fmt::format("error: {}\n", report.error);
    }
    out += fmt::format("exit status {}\n", report.exit_code);
    return out;
}

}  // namespace qobs
