#pragma once

#include <vector>

#include "qobs/core_model.hpp"

namespace qobs {

// [R, Theta R] and its numerical rank.
struct ControllabilitySpan {
    Matrix cr;
    int rank = 0;
};

[[nodiscard]] ControllabilitySpan controllability_span(const CommutationMatrix& theta, const Matrix& r,
                                                       double rank_rel_tol = kRankRelTol);

// Split of the plant into a dynamic part x1 = P1^T x and a part x2 = P2^T x
// that stays constant under the plant Hamiltonian.
//
// P = [P1, P2] holds the left singular vectors of [R, Theta R]. P1 follows
// the SVD ordering (descending singular values). The null-space block P2 is
// rotated so that theta22 = diag(J, ..., J); any orthonormal basis of that
// block is a valid set of singular vectors.
struct DecomposedPlant {
    Matrix p;
    Matrix theta11;
    Matrix theta22;
    Matrix r_p11;
    Matrix c_p2_tilde;
    int n_p1 = 0;
    int n_p2 = 0;

    // Numerical checks of the block structure; all should be ~1e-15 for a
    // plant meeting the estimability conditions.
    double orthogonality_residual = 0.0;  // |P^T P - I|
    double theta_offdiag_residual = 0.0;  // off-diagonal blocks of P^T Theta P
    double r_block_residual = 0.0;        // P^T R P outside the (1,1) block
    double c_p1_residual = 0.0;           // C P1, zero iff z depends on x2 only
    double theta11_min_sv = 0.0;
    double theta22_min_sv = 0.0;
    bool controllable = false;            // rank [R1, Theta11 R1] == n_p1
};

[[nodiscard]] DecomposedPlant decompose_plant(const QuantumLinearSystem& plant,
                                              double rank_rel_tol = kRankRelTol);

/// Builds the plant whose outputs are given in transformed coordinates,
/// C = [0, c_p2_tilde] P^T, for the basis P computed from (theta, r).
///
/// The returned decomposition carries c_p2_tilde verbatim rather than the
/// round-off perturbed C P.
struct RealizedPlant {
    QuantumLinearSystem plant;
    DecomposedPlant decomposition;
};

[[nodiscard]] RealizedPlant realize_output(const CommutationMatrix& theta, const Matrix& r,
                                           const Matrix& c_p2_tilde, double rank_rel_tol = kRankRelTol);

// Sorted imaginary parts of the eigenvalues of a real skew-symmetric matrix.
// Two skew matrices are orthogonally similar iff these agree.
[[nodiscard]] std::vector<double> skew_frequencies(const Matrix& skew);

// Sorted eigenvalues of a symmetric matrix.
[[nodiscard]] std::vector<double> symmetric_eigenvalues(const Matrix& sym);

// |c_p2_tilde theta22 c_p2_tilde^T|_max
[[nodiscard]] double transformed_condition_check(const DecomposedPlant& dec);

}  // namespace qobs
