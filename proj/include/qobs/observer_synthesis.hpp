#pragma once

#include <optional>
#include <stdexcept>

#include "qobs/core_model.hpp"
#include "qobs/plant_analysis.hpp"

namespace qobs {

inline constexpr double kDesignTol = 1e-10;

// Thrown when a plant cannot be observed or user-supplied observer matrices
// are inconsistent. Carries the plant condition report when one exists.
class SynthesisError : public std::runtime_error {
public:
    SynthesisError(const std::string& what, std::optional<ConditionReport> report = std::nullopt)
        : std::runtime_error(what), report_(std::move(report)) {}

    [[nodiscard]] const std::optional<ConditionReport>& report() const { return report_; }

private:
    std::optional<ConditionReport> report_;
};

// Overrides for the observer parameters. Anything left unset takes the
// default R_o = omega I, C_o = [I, 0], beta = -R_o C_o^T (C_o C_o^T)^-1.
struct ObserverOptions {
    double omega = 1.0;
    std::optional<Matrix> r_o;
    std::optional<Matrix> c_o;
    std::optional<Matrix> beta;
    ConditionOptions conditions;
};

struct ObserverDesign {
    int n_o = 0;
    int m = 0;
    Matrix r_o;        // n_o x n_o, positive definite
    Matrix beta;       // n_o x m
    Matrix c_o;        // m x n_o
    Matrix r_c_tilde;  // n_p2 x n_o, c_p2_tilde^T beta^T
    Matrix r_c;        // n_p x n_o, P [0; r_c_tilde]
    CommutationMatrix theta_o{1};

    // |-C_o R_o^-1 beta - I|_max
    double design_residual = 0.0;
};

// n_o = m for even m, m + 1 for odd m.
[[nodiscard]] int observer_order(int m);

[[nodiscard]] ObserverDesign synthesize_observer(const QuantumLinearSystem& plant, const DecomposedPlant& dec,
                                                 const ObserverOptions& options = {});

// Same design with the plant coupling removed (R_c = 0); used as a control case.
[[nodiscard]] ObserverDesign without_coupling(ObserverDesign design);

// x_o steady state -R_o^-1 beta z_p.
[[nodiscard]] Vector predict_steady_state(const ObserverDesign& obs, const Vector& zp0);

// Residual |-C_o R_o^-1 beta - I|_max for arbitrary (R_o, C_o, beta).
[[nodiscard]] double design_equation_residual(const Matrix& r_o, const Matrix& c_o, const Matrix& beta);

struct AugmentedSystem {
    int n_p = 0;
    int n_o = 0;
    CommutationMatrix theta_a{1};
    Matrix r_a;
    Matrix a_a;
    Matrix zp_selector;  // [C_p, 0]
    Matrix zo_selector;  // [0, C_o]

    [[nodiscard]] int dim() const { return n_p + n_o; }
};

[[nodiscard]] AugmentedSystem assemble_augmented(const QuantumLinearSystem& plant, const ObserverDesign& obs);

}  // namespace qobs
