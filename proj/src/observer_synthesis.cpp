#include "qobs/observer_synthesis.hpp"

#include <fmt/core.h>

namespace qobs {
namespace {

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (m.rows() != rows || m.cols() != cols) {
        throw SynthesisError(fmt::format("{} must be {}x{}, got {}x{}", name, rows, cols, m.rows(), m.cols()));
    }
}

std::string failing_conditions(const ConditionReport& report) {
    std::string out;
    auto add = [&](bool ok, const char* name) {
        if (!ok) {
            out += out.empty() ? name : fmt::format(", {}", name);
        }
    };
    add(report.tf_cond_ok, "tf_cond");
    add(report.cjc_ok, "cjc");
    add(report.rank_ok, "rank");
    add(report.bound_ok, "bound");
    return out;
}

}  // namespace

int observer_order(int m) {
    return m % 2 == 0 ? m : m + 1;
}

double design_equation_residual(const Matrix& r_o, const Matrix& c_o, const Matrix& beta) {
    const Matrix lhs = -c_o * r_o.ldlt().solve(beta);
    return max_abs(lhs - Matrix::Identity(lhs.rows(), lhs.cols()));
}

ObserverDesign synthesize_observer(const QuantumLinearSystem& plant, const DecomposedPlant& dec,
                                   const ObserverOptions& options) {
    const ConditionReport report = check_plant_conditions(plant, options.conditions);
    if (!report.all_ok()) {
        throw SynthesisError(fmt::format("plant fails estimability conditions: {}", failing_conditions(report)),
                             report);
    }
    if (dec.n_p2 == 0) {
        throw SynthesisError("plant has no constant variables to estimate", report);
    }
    if (dec.p.rows() != plant.n() || dec.c_p2_tilde.rows() != plant.m() || dec.c_p2_tilde.cols() != dec.n_p2) {
        throw SynthesisError("decomposition does not belong to this plant");
    }

    ObserverDesign obs;
    obs.m = plant.m();
    obs.n_o = observer_order(obs.m);
    obs.theta_o = CommutationMatrix(obs.n_o / 2);
    const int m = obs.m;
    const int n_o = obs.n_o;

    if (options.r_o) {
        require_shape(*options.r_o, n_o, n_o, "R_o");
        obs.r_o = *options.r_o;
    } else {
        if (!(options.omega > 0.0)) {
            throw SynthesisError(fmt::format("observer stiffness omega must be positive, got {}", options.omega));
        }
        obs.r_o = options.omega * Matrix::Identity(n_o, n_o);
    }
    if (max_abs(obs.r_o - obs.r_o.transpose()) > kSymmetryTol) {
        throw SynthesisError("R_o must be symmetric");
    }
    Eigen::LLT<Matrix> llt(obs.r_o);
    if (llt.info() != Eigen::Success) {
        throw SynthesisError("R_o must be positive definite");
    }

    if (options.c_o) {
        require_shape(*options.c_o, m, n_o, "C_o");
        obs.c_o = *options.c_o;
    } else {
        obs.c_o = Matrix::Zero(m, n_o);
        obs.c_o.leftCols(m).setIdentity();
    }

    if (options.beta) {
        require_shape(*options.beta, n_o, m, "beta");
        obs.beta = *options.beta;
    } else {
        if (numerical_rank(obs.c_o) != m) {
            throw SynthesisError("C_o must have full row rank to derive beta");
        }
        const Matrix cct = obs.c_o * obs.c_o.transpose();
        obs.beta = -obs.r_o * obs.c_o.transpose() * cct.inverse();
    }
    if (numerical_rank(obs.beta) != m) {
        throw SynthesisError("beta must have full column rank");
    }

    obs.design_residual = design_equation_residual(obs.r_o, obs.c_o, obs.beta);
    if (obs.design_residual > kDesignTol) {
        throw SynthesisError(
            fmt::format("observer matrices violate -C_o R_o^-1 beta = I (residual {:.3e})", obs.design_residual));
    }

    obs.r_c_tilde = dec.c_p2_tilde.transpose() * obs.beta.transpose();
    Matrix stacked = Matrix::Zero(plant.n(), n_o);
    stacked.bottomRows(dec.n_p2) = obs.r_c_tilde;
    obs.r_c = dec.p * stacked;
    return obs;
}

ObserverDesign without_coupling(ObserverDesign design) {
    design.r_c.setZero();
    design.r_c_tilde.setZero();
    return design;
}

Vector predict_steady_state(const ObserverDesign& obs, const Vector& zp0) {
    if (zp0.size() != obs.beta.cols()) {
        throw DimensionError(fmt::format("z_p has {} entries, observer expects {}", zp0.size(), obs.beta.cols()));
    }
    return -obs.r_o.llt().solve(obs.beta * zp0);
}

AugmentedSystem assemble_augmented(const QuantumLinearSystem& plant, const ObserverDesign& obs) {
    validate(plant);
    const int n_p = plant.n();
    const int n_o = obs.n_o;
    const int m = plant.m();
    if (obs.r_c.rows() != n_p || obs.r_c.cols() != n_o || obs.r_o.rows() != n_o || obs.c_o.rows() != m ||
        obs.c_o.cols() != n_o || obs.theta_o.dim() != n_o) {
        throw DimensionError("observer dimensions do not match the plant");
    }

    AugmentedSystem aug;
    aug.n_p = n_p;
    aug.n_o = n_o;
    Matrix theta = Matrix::Zero(n_p + n_o, n_p + n_o);
    theta.topLeftCorner(n_p, n_p) = plant.theta.matrix();
    theta.bottomRightCorner(n_o, n_o) = obs.theta_o.matrix();
    aug.theta_a = CommutationMatrix::from_matrix(theta);

    aug.r_a.resize(n_p + n_o, n_p + n_o);
    aug.r_a << plant.r, obs.r_c, obs.r_c.transpose(), obs.r_o;
    aug.a_a = dynamics_from_hamiltonian(aug.theta_a, aug.r_a);

    aug.zp_selector = Matrix::Zero(m, n_p + n_o);
    aug.zp_selector.leftCols(n_p) = plant.c;
    aug.zo_selector = Matrix::Zero(m, n_p + n_o);
    aug.zo_selector.rightCols(n_o) = obs.c_o;
    return aug;
}

}  // namespace qobs
