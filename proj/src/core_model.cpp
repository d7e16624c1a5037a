#include "qobs/core_model.hpp"

#include <algorithm>

#include <fmt/core.h>

namespace qobs {

double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

int numerical_rank(const Matrix& m, double rel_tol) {
    if (m.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    if (sigma_max == 0.0) {
        return 0;
    }
    const double tol = static_cast<double>(std::max(m.rows(), m.cols())) * sigma_max * rel_tol;
    return static_cast<int>((sigma.array() > tol).count());
}

CommutationMatrix::CommutationMatrix(int n_modes) {
    if (n_modes < 1) {
        throw DimensionError(fmt::format("commutation matrix needs at least one mode, got {}", n_modes));
    }
    const int n = 2 * n_modes;
    theta_ = Matrix::Zero(n, n);
    for (int k = 0; k < n_modes; ++k) {
        theta_(2 * k, 2 * k + 1) = 1.0;
        theta_(2 * k + 1, 2 * k) = -1.0;
    }
}

CommutationMatrix CommutationMatrix::from_matrix(const Matrix& theta) {
    if (theta.rows() != theta.cols() || theta.rows() == 0 || theta.rows() % 2 != 0) {
        throw DimensionError(fmt::format("commutation matrix must be square of even size, got {}x{}",
                                         theta.rows(), theta.cols()));
    }
    if (max_abs(theta + theta.transpose()) != 0.0) {
        throw DimensionError("commutation matrix must be exactly skew-symmetric");
    }
    CommutationMatrix out;
    out.theta_ = theta;
    return out;
}

bool CommutationMatrix::is_canonical() const {
    return theta_ == CommutationMatrix(modes()).theta_;
}

CommutationMatrix make_commutation_matrix(int n_modes) {
    return CommutationMatrix(n_modes);
}

void validate(const QuantumLinearSystem& plant) {
    const int n = plant.n();
    if (plant.r.rows() != n || plant.r.cols() != n) {
        throw DimensionError(fmt::format("Hamiltonian matrix must be {}x{}, got {}x{}", n, n,
                                         plant.r.rows(), plant.r.cols()));
    }
    if (max_abs(plant.r - plant.r.transpose()) > kSymmetryTol) {
        throw DimensionError("Hamiltonian matrix is not symmetric");
    }
    if (plant.c.rows() < 1) {
        throw DimensionError("output matrix needs at least one row");
    }
    if (plant.c.cols() != n) {
        throw DimensionError(fmt::format("output matrix must have {} columns, got {}", n, plant.c.cols()));
    }
    if (!plant.r.allFinite() || !plant.c.allFinite()) {
        throw DimensionError("plant matrices contain non-finite entries");
    }
}

QuantumLinearSystem make_plant(int n_modes, Matrix r, Matrix c) {
    QuantumLinearSystem plant{CommutationMatrix(n_modes), std::move(r), std::move(c)};
    validate(plant);
    return plant;
}

Matrix dynamics_from_hamiltonian(const CommutationMatrix& theta, const Matrix& r) {
    if (r.rows() != theta.dim() || r.cols() != theta.dim()) {
        throw DimensionError(fmt::format("Hamiltonian matrix must be {0}x{0}, got {1}x{2}", theta.dim(),
                                         r.rows(), r.cols()));
    }
    if (max_abs(r - r.transpose()) > kSymmetryTol) {
        throw DimensionError("Hamiltonian matrix is not symmetric");
    }
    return 2.0 * theta.matrix() * r;
}

ConditionReport check_plant_conditions(const QuantumLinearSystem& plant, const ConditionOptions& options) {
    validate(plant);
    const Matrix& theta = plant.theta.matrix();
    const int n = plant.n();

    // Theta^2 = -I, so the range of [R, Theta R] is the full controllability range
    // and C Theta^k R = 0 for all k reduces to these two blocks.
    Matrix cr(n, 2 * n);
    cr << plant.r, theta * plant.r;

    ConditionReport report;
    report.m = plant.m();
    report.rank_cr = numerical_rank(cr, options.rank_rel_tol);
    report.n_p2 = n - report.rank_cr;
    report.rank_c = numerical_rank(plant.c, options.rank_rel_tol);

    const double tf_residual = max_abs(plant.c * cr);
    const double cjc_residual = max_abs(plant.c * theta * plant.c.transpose());
    report.residuals["tf_cond"] = tf_residual;
    report.residuals["cjc"] = cjc_residual;
    report.residuals["rank_gap"] = static_cast<double>(report.m - report.rank_c);

    report.tf_cond_ok = tf_residual <= options.tol_cond;
    report.cjc_ok = cjc_residual <= options.tol_cond;
    report.rank_ok = report.rank_c == report.m;
    report.bound_ok = 2 * report.m <= report.n_p2;
    return report;
}

}  // namespace qobs
