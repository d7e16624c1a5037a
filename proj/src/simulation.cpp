#include "qobs/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace qobs {
namespace {

// Relative step-length tolerance under which two grid intervals share one exponential.
constexpr double kStepReuseTol = 1e-12;
// The oracle aborts once the commutation residual exceeds this, relative to |X|^2.
constexpr double kOracleCcrTol = 1e-6;

void check_grid(const std::vector<double>& times) {
    if (times.empty()) {
        throw std::invalid_argument("time grid is empty");
    }
    if (times.front() != 0.0) {
        throw std::invalid_argument(fmt::format("time grid must start at 0, starts at {}", times.front()));
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1]) || !std::isfinite(times[k])) {
            throw std::invalid_argument(fmt::format("time grid is not strictly increasing at index {}", k));
        }
    }
}

long double extended_residual(const ExtendedMatrix& m) {
    return m.cwiseAbs().maxCoeff();
}

struct ExtendedSystem {
    ExtendedMatrix theta;
    ExtendedMatrix r;
    ExtendedMatrix zp_selector;
    ExtendedMatrix zo_selector;

    explicit ExtendedSystem(const AugmentedSystem& aug)
        : theta(aug.theta_a.matrix().cast<long double>()),
          r(aug.r_a.cast<long double>()),
          zp_selector(aug.zp_selector.cast<long double>()),
          zo_selector(aug.zo_selector.cast<long double>()) {}
};

void append_sample(TrajectoryRecord& rec, const ExtendedSystem& sys, double t, const ExtendedMatrix& phi) {
    rec.times.push_back(t);
    rec.zp_coeffs.push_back((sys.zp_selector * phi).cast<double>());
    rec.zo_coeffs.push_back((sys.zo_selector * phi).cast<double>());
    const auto ccr = static_cast<double>(extended_residual(phi * sys.theta * phi.transpose() - sys.theta));
    const auto energy = static_cast<double>(extended_residual(phi.transpose() * sys.r * phi - sys.r));
    rec.ccr_residual = std::max(rec.ccr_residual, ccr);
    rec.energy_residual = std::max(rec.energy_residual, energy);
}

// Trapezoidal running average; must run in grid order.
void fill_running_average(TrajectoryRecord& rec) {
    rec.zo_avg.clear();
    if (rec.times.size() < 2) {
        return;
    }
    rec.zo_avg.reserve(rec.times.size());
    rec.zo_avg.push_back(rec.zo_coeffs.front());
    Matrix integral = Matrix::Zero(rec.zo_coeffs.front().rows(), rec.zo_coeffs.front().cols());
    for (std::size_t k = 1; k < rec.times.size(); ++k) {
        const double h = rec.times[k] - rec.times[k - 1];
        integral += 0.5 * h * (rec.zo_coeffs[k - 1] + rec.zo_coeffs[k]);
        rec.zo_avg.push_back(integral / rec.times[k]);
    }
}

std::optional<double> fit_log_log_slope(const std::vector<double>& t, const std::vector<double>& e) {
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] > 0.0 && e[i] > 0.0 && std::isfinite(e[i])) {
            x.push_back(std::log(t[i]));
            y.push_back(std::log(e[i]));
        }
    }
    if (x.size() < 5) {
        return std::nullopt;
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) {
        return std::nullopt;
    }
    return sxy / sxx;
}

std::size_t nearest_index(const std::vector<double>& times, double t) {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end()) {
        return times.size() - 1;
    }
    const auto idx = static_cast<std::size_t>(it - times.begin());
    if (idx > 0 && t - times[idx - 1] < times[idx] - t) {
        return idx - 1;
    }
    return idx;
}

double spectral_radius(const Matrix& a) {
    Eigen::EigenSolver<Matrix> solver(a, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

double ccr_residual(const Matrix& phi, const Matrix& theta) {
    return max_abs(phi * theta * phi.transpose() - theta);
}

double energy_residual(const Matrix& phi, const Matrix& r) {
    return max_abs(phi.transpose() * r * phi - r);
}

std::vector<double> uniform_grid(double t_end, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument(fmt::format("time step must be positive, got {}", dt));
    }
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
        throw std::invalid_argument(fmt::format("horizon must be non-negative, got {}", t_end));
    }
    const double ratio = t_end / dt;
    auto steps = static_cast<long long>(std::llround(ratio));
    if (static_cast<double>(steps) > ratio * (1.0 + 1e-9) + 1e-9) {
        steps = static_cast<long long>(std::floor(ratio));
    }
    std::vector<double> times(static_cast<std::size_t>(steps) + 1);
    for (long long k = 0; k <= steps; ++k) {
        times[static_cast<std::size_t>(k)] = static_cast<double>(k) * dt;
    }
    return times;
}

TrajectoryRecord propagate(const AugmentedSystem& aug, const std::vector<double>& times) {
    check_grid(times);
    const Eigen::Index n = aug.a_a.rows();
    const ExtendedSystem sys(aug);
    const ExtendedMatrix a = aug.a_a.cast<long double>();
    TrajectoryRecord rec;
    rec.times.reserve(times.size());
    rec.zp_coeffs.reserve(times.size());
    rec.zo_coeffs.reserve(times.size());

    ExtendedMatrix phi = ExtendedMatrix::Identity(n, n);
    append_sample(rec, sys, 0.0, phi);

    double cached_h = -1.0;
    ExtendedMatrix step;
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double h = times[k] - times[k - 1];
        if (cached_h < 0.0 || std::abs(h - cached_h) > kStepReuseTol * cached_h) {
            step = matrix_exponential_extended(a * static_cast<long double>(h));
            cached_h = h;
        }
        phi = (step * phi).eval();
        append_sample(rec, sys, times[k], phi);
    }
    fill_running_average(rec);
    return rec;
}

std::vector<double> average_error_series(const TrajectoryRecord& rec, const AugmentedSystem& aug) {
    std::vector<double> errors;
    errors.reserve(rec.zo_avg.size());
    for (const auto& avg : rec.zo_avg) {
        errors.push_back((avg - aug.zp_selector).norm());
    }
    return errors;
}

ConvergenceReport time_average_error(const TrajectoryRecord& rec, const AugmentedSystem& aug,
                                     const ConvergenceOptions& options) {
    if (rec.zo_avg.empty() || rec.zo_avg.size() != rec.times.size()) {
        throw std::invalid_argument("trajectory has no running average");
    }
    const double t_end = rec.times.back();
    if (t_end < 10.0) {
        throw std::invalid_argument(fmt::format("convergence check needs a horizon of at least 10, got {}", t_end));
    }

    ConvergenceReport report;
    for (const auto& zp : rec.zp_coeffs) {
        report.zp_drift = std::max(report.zp_drift, max_abs(zp - rec.zp_coeffs.front()));
    }
    const std::vector<double> errors = average_error_series(rec, aug);
    report.final_error = errors.back();

    std::vector<std::size_t> indices;
    for (int j = 5; j >= 0; --j) {
        const std::size_t idx = nearest_index(rec.times, t_end / std::ldexp(1.0, j));
        if (idx > 0 && (indices.empty() || idx != indices.back())) {
            indices.push_back(idx);
        }
    }
    std::vector<double> point_errors;
    for (std::size_t idx : indices) {
        const double t = rec.times[idx];
        double peak = 0.0;
        for (std::size_t k = idx + 1; k-- > 0 && rec.times[k] >= 0.5 * t;) {
            peak = std::max(peak, errors[k]);
        }
        report.sample_times.push_back(t);
        report.sample_errors.push_back(peak);
        point_errors.push_back(errors[idx]);
    }
    report.decay_slope = fit_log_log_slope(report.sample_times, report.sample_errors);
    report.point_slope = fit_log_log_slope(report.sample_times, point_errors);

    const bool drift_ok = report.zp_drift <= options.zp_drift_tol;
    bool slope_ok = false;
    if (report.decay_slope) {
        slope_ok = *report.decay_slope >= options.slope_min && *report.decay_slope <= options.slope_max;
    } else {
        slope_ok = options.allow_missing_slope;
    }
    report.passed = drift_ok && slope_ok;
    return report;
}

double record_deviation(const TrajectoryRecord& a, const TrajectoryRecord& b) {
    double worst = 0.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        while (j < b.times.size() && b.times[j] < a.times[i] - 1e-9) {
            ++j;
        }
        if (j == b.times.size()) {
            break;
        }
        if (std::abs(b.times[j] - a.times[i]) <= 1e-9) {
            worst = std::max({worst, max_abs(a.zp_coeffs[i] - b.zp_coeffs[j]), max_abs(a.zo_coeffs[i] - b.zo_coeffs[j])});
        }
    }
    return worst;
}

TrajectoryRecord ode_oracle(const AugmentedSystem& aug, double t_end, double dt) {
    if (!(dt > 0.0) || !(t_end > 0.0)) {
        throw std::invalid_argument("oracle needs positive horizon and step");
    }
    const double ratio = t_end / dt;
    const auto steps = static_cast<long long>(std::llround(ratio));
    if (std::abs(static_cast<double>(steps) - ratio) > 1e-9 * ratio) {
        throw std::invalid_argument(fmt::format("horizon {} is not a multiple of the step {}", t_end, dt));
    }

    const Matrix& a = aug.a_a;
    const Matrix& theta = aug.theta_a.matrix();
    const Eigen::Index n = a.rows();
    const ExtendedSystem sys(aug);
    TrajectoryRecord rec;
    rec.times.reserve(static_cast<std::size_t>(steps) + 1);
    Matrix x = Matrix::Identity(n, n);
    append_sample(rec, sys, 0.0, x.cast<long double>());

    for (long long k = 1; k <= steps; ++k) {
        const Matrix k1 = a * x;
        const Matrix k2 = a * (x + 0.5 * dt * k1);
        const Matrix k3 = a * (x + 0.5 * dt * k2);
        const Matrix k4 = a * (x + dt * k3);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        const double residual = ccr_residual(x, theta);
        const double scale = std::max(1.0, x.squaredNorm());
        if (!std::isfinite(residual) || residual > kOracleCcrTol * scale) {
            throw std::runtime_error(fmt::format(
                "RK4 oracle lost the commutation relations at t = {} (residual {:.3e}); step {} is too large "
                "for spectral radius {:.3e}",
                static_cast<double>(k) * dt, residual, dt, spectral_radius(a)));
        }
        append_sample(rec, sys, static_cast<double>(k) * dt, x.cast<long double>());
    }
    fill_running_average(rec);
    return rec;
}

}  // namespace qobs
