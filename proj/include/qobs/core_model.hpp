#pragma once

#include <Eigen/Dense>

#include <map>
#include <stdexcept>
#include <string>

namespace qobs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Absolute element-wise tolerance for symmetry of Hamiltonian matrices.
inline constexpr double kSymmetryTol = 1e-12;
// Absolute max-norm tolerance for the algebraic plant conditions.
inline constexpr double kConditionTol = 1e-9;
// Relative factor in the SVD rank threshold max_dim * sigma_max * factor.
inline constexpr double kRankRelTol = 1e-12;

// Raised for malformed inputs: wrong shapes, asymmetric Hamiltonians, odd
// variable counts.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

[[nodiscard]] double max_abs(const Matrix& m);

// Number of singular values above max(rows, cols) * sigma_max * rel_tol.
[[nodiscard]] int numerical_rank(const Matrix& m, double rel_tol = kRankRelTol);

/// Canonical commutation matrix diag(J, ..., J) with J = [[0, 1], [-1, 0]].
///
/// The matrix is held by value and only constructible in canonical form or
/// from an explicitly skew-symmetric matrix, so a CommutationMatrix is always
/// skew-symmetric.
class CommutationMatrix {
public:
    explicit CommutationMatrix(int n_modes);

    // Accepts any exactly skew-symmetric matrix of even dimension.
    static CommutationMatrix from_matrix(const Matrix& theta);

    [[nodiscard]] const Matrix& matrix() const { return theta_; }
    [[nodiscard]] int dim() const { return static_cast<int>(theta_.rows()); }
    [[nodiscard]] int modes() const { return dim() / 2; }
    [[nodiscard]] bool is_canonical() const;

private:
    CommutationMatrix() = default;
    Matrix theta_;
};

[[nodiscard]] CommutationMatrix make_commutation_matrix(int n_modes);

// Closed plant: Hamiltonian H = x^T R x / 2, outputs z = C x.
struct QuantumLinearSystem {
    CommutationMatrix theta;
    Matrix r;
    Matrix c;

    [[nodiscard]] int n() const { return theta.dim(); }
    [[nodiscard]] int m() const { return static_cast<int>(c.rows()); }
};

// Throws DimensionError when the plant is structurally invalid.
void validate(const QuantumLinearSystem& plant);

[[nodiscard]] QuantumLinearSystem make_plant(int n_modes, Matrix r, Matrix c);

// A = 2 Theta R.
[[nodiscard]] Matrix dynamics_from_hamiltonian(const CommutationMatrix& theta, const Matrix& r);

struct ConditionOptions {
    double tol_cond = kConditionTol;
    double rank_rel_tol = kRankRelTol;
};

struct ConditionReport {
    bool tf_cond_ok = false;  // C (sI - Theta)^-1 R == 0
    bool cjc_ok = false;      // C Theta C^T == 0
    bool rank_ok = false;     // rank C == m
    bool bound_ok = false;    // m <= n_p2 / 2
    int rank_cr = 0;
    int rank_c = 0;
    int n_p2 = 0;
    int m = 0;
    // "tf_cond", "cjc" are max-norm residuals; "rank_gap" is m - rank C.
    std::map<std::string, double> residuals;

    [[nodiscard]] bool all_ok() const { return tf_cond_ok && cjc_ok && rank_ok && bound_ok; }
};

[[nodiscard]] ConditionReport check_plant_conditions(const QuantumLinearSystem& plant,
                                                     const ConditionOptions& options = {});

}  // namespace qobs
