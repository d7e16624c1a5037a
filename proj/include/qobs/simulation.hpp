#pragma once

#include <optional>
#include <vector>

#include "qobs/core_model.hpp"
#include "qobs/observer_synthesis.hpp"

namespace qobs {

// Working precision of the propagator. Phi(t) grows linearly in t for
// coupled systems, and the commutation residual of a stored Phi carries
// round-off of order eps |Phi|^2, so the stepping runs on a 64-bit mantissa.
using ExtendedMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// e^A by scaling and squaring with the degree-13 Pade approximant.
[[nodiscard]] ExtendedMatrix matrix_exponential_extended(const ExtendedMatrix& a);
// Same, computed in extended precision and rounded.
[[nodiscard]] Matrix matrix_exponential(const Matrix& a);

// 0, dt, 2 dt, ..., t_end (t_end included when it is a multiple of dt).
[[nodiscard]] std::vector<double> uniform_grid(double t_end, double dt);

// Coefficients of z_p(t), z_o(t) with respect to the initial variables x_a(0).
struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<Matrix> zp_coeffs;  // [C_p, 0] Phi(t)
    std::vector<Matrix> zo_coeffs;  // [0, C_o] Phi(t)
    // (1/t) int_0^t zo_coeffs; index 0 holds the t -> 0 limit zo_coeffs[0].
    // Empty when the grid has a single point.
    std::vector<Matrix> zo_avg;
    // max_t |Phi Theta Phi^T - Theta|, evaluated on the extended-precision
    // Phi; drift guard for the stepping scheme.
    double ccr_residual = 0.0;
    // max_t |Phi^T R Phi - R|.
    double energy_residual = 0.0;
};

// Phi(t_k) built by stepping with e^{A dt_k}; one exponential per distinct step.
[[nodiscard]] TrajectoryRecord propagate(const AugmentedSystem& aug, const std::vector<double>& times);

struct ConvergenceOptions {
    double zp_drift_tol = 1e-6;
    double slope_min = -1.3;
    double slope_max = -0.7;
    // Accept a run whose horizon is too short for a slope fit.
    bool allow_missing_slope = false;
};

struct ConvergenceReport {
    double zp_drift = 0.0;
    double final_error = 0.0;
    // Least-squares slope of log E(T) against log T over the dyadic samples
    // T_end / 32, ..., T_end, where E(T) is the peak error over [T/2, T].
    std::optional<double> decay_slope;
    // Same fit on the raw error at the sample points. Informational only: it
    // aliases when a sample lands near a period of the observer oscillation.
    std::optional<double> point_slope;
    std::vector<double> sample_times;
    std::vector<double> sample_errors;
    bool passed = false;
};

// |zo_avg(t_k) - [C_p, 0]|_F for every grid point.
[[nodiscard]] std::vector<double> average_error_series(const TrajectoryRecord& rec, const AugmentedSystem& aug);

[[nodiscard]] ConvergenceReport time_average_error(const TrajectoryRecord& rec, const AugmentedSystem& aug,
                                                   const ConvergenceOptions& options = {});

// Fixed-step RK4 on dX/dt = A_a X, X(0) = I, recorded every step.
[[nodiscard]] TrajectoryRecord ode_oracle(const AugmentedSystem& aug, double t_end, double dt);

// Largest max-norm difference of the z_p and z_o coefficients over the time
// points the two records share (matched to 1e-9).
[[nodiscard]] double record_deviation(const TrajectoryRecord& a, const TrajectoryRecord& b);

// max |Phi Theta Phi^T - Theta| and max |Phi^T R Phi - R|.
[[nodiscard]] double ccr_residual(const Matrix& phi, const Matrix& theta);
[[nodiscard]] double energy_residual(const Matrix& phi, const Matrix& r);

}  // namespace qobs
