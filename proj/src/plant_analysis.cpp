#include "qobs/plant_analysis.hpp"

#include <algorithm>
#include <complex>

#include <fmt/core.h>

namespace qobs {
namespace {

// Rotates an orthonormal basis of a Theta-invariant subspace so that the
// restriction of Theta becomes diag(J, ..., J): each new pair is (q, -Theta q).
Matrix canonical_invariant_basis(const Matrix& theta, const Matrix& basis) {
    const Eigen::Index k = basis.cols();
    Matrix out(basis.rows(), k);
    Eigen::Index filled = 0;
    while (filled < k) {
        Eigen::Index best = -1;
        double best_norm = 0.0;
        Vector best_vec;
        for (Eigen::Index j = 0; j < k; ++j) {
            Vector v = basis.col(j);
            v -= out.leftCols(filled) * (out.leftCols(filled).transpose() * v);
            const double nv = v.norm();
            if (nv > best_norm) {
                best_norm = nv;
                best = j;
                best_vec = v;
            }
        }
        if (best < 0 || best_norm < 1e-6 || filled + 2 > k) {
            throw std::runtime_error("null-space block is not invariant under the commutation matrix");
        }
        Vector q1 = best_vec / best_norm;
        Vector q2 = -theta * q1;
        q2 -= out.leftCols(filled) * (out.leftCols(filled).transpose() * q2);
        q2 -= q1 * q1.dot(q2);
        q2.normalize();
        out.col(filled) = q1;
        out.col(filled + 1) = q2;
        filled += 2;
    }
    return out;
}

double min_singular_value(const Matrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

// Everything except the output blocks.
DecomposedPlant decompose_hamiltonian(const CommutationMatrix& theta_p, const Matrix& r,
                                      double rank_rel_tol) {
    const ControllabilitySpan span = controllability_span(theta_p, r, rank_rel_tol);
    const Matrix& theta = theta_p.matrix();
    const int n = theta_p.dim();

    DecomposedPlant dec;
    dec.n_p1 = span.rank;
    dec.n_p2 = n - span.rank;
    if (dec.n_p1 % 2 != 0) {
        // The range of [R, Theta R] is Theta-invariant and so even dimensional;
        // an odd rank means the threshold split a cluster of singular values.
        throw std::runtime_error(fmt::format("controllability span has odd numerical rank {}", dec.n_p1));
    }

    if (span.rank == 0) {
        dec.p = Matrix::Identity(n, n);
    } else {
        Eigen::JacobiSVD<Matrix> svd(span.cr, Eigen::ComputeFullU);
        if (svd.info() != Eigen::Success) {
            throw std::runtime_error("SVD of the controllability span did not converge");
        }
        dec.p = svd.matrixU();
    }
    if (dec.n_p2 > 0) {
        dec.p.rightCols(dec.n_p2) = canonical_invariant_basis(theta, dec.p.rightCols(dec.n_p2));
    }

    const Matrix theta_t = dec.p.transpose() * theta * dec.p;
    const Matrix r_t = dec.p.transpose() * r * dec.p;
    const int n1 = dec.n_p1;
    const int n2 = dec.n_p2;

    dec.theta11 = theta_t.topLeftCorner(n1, n1);
    dec.theta22 = theta_t.bottomRightCorner(n2, n2);
    dec.r_p11 = r_t.topLeftCorner(n1, n1);
    // Symmetrize away round-off so downstream checks see an exactly symmetric block.
    dec.r_p11 = 0.5 * (dec.r_p11 + dec.r_p11.transpose()).eval();

    dec.orthogonality_residual = max_abs(dec.p.transpose() * dec.p - Matrix::Identity(n, n));
    dec.theta_offdiag_residual =
        std::max(max_abs(theta_t.topRightCorner(n1, n2)), max_abs(theta_t.bottomLeftCorner(n2, n1)));
    dec.r_block_residual = std::max({max_abs(r_t.topRightCorner(n1, n2)), max_abs(r_t.bottomLeftCorner(n2, n1)),
                                     max_abs(r_t.bottomRightCorner(n2, n2))});
    dec.theta11_min_sv = min_singular_value(dec.theta11);
    dec.theta22_min_sv = min_singular_value(dec.theta22);

    if (n1 == 0) {
        dec.controllable = true;
    } else {
        const Matrix r1 = (dec.p.transpose() * r).topRows(n1);
        Matrix ctrb(n1, 2 * n);
        ctrb << r1, dec.theta11 * r1;
        dec.controllable = numerical_rank(ctrb, rank_rel_tol) == n1;
    }
    return dec;
}

}  // namespace

ControllabilitySpan controllability_span(const CommutationMatrix& theta, const Matrix& r, double rank_rel_tol) {
    const int n = theta.dim();
    if (r.rows() != n || r.cols() != n) {
        throw DimensionError(fmt::format("Hamiltonian matrix must be {0}x{0}, got {1}x{2}", n, r.rows(), r.cols()));
    }
    ControllabilitySpan span;
    span.cr.resize(n, 2 * n);
    span.cr << r, theta.matrix() * r;
    span.rank = numerical_rank(span.cr, rank_rel_tol);
    return span;
}

DecomposedPlant decompose_plant(const QuantumLinearSystem& plant, double rank_rel_tol) {
    validate(plant);
    DecomposedPlant dec = decompose_hamiltonian(plant.theta, plant.r, rank_rel_tol);
    const Matrix c_t = plant.c * dec.p;
    dec.c_p2_tilde = c_t.rightCols(dec.n_p2);
    dec.c_p1_residual = max_abs(c_t.leftCols(dec.n_p1));
    return dec;
}

RealizedPlant realize_output(const CommutationMatrix& theta, const Matrix& r, const Matrix& c_p2_tilde,
                             double rank_rel_tol) {
    if (r.rows() != theta.dim() || r.cols() != theta.dim() || max_abs(r - r.transpose()) > kSymmetryTol) {
        throw DimensionError("Hamiltonian matrix must be square, symmetric and match the commutation matrix");
    }
    DecomposedPlant dec = decompose_hamiltonian(theta, r, rank_rel_tol);
    if (c_p2_tilde.cols() != dec.n_p2 || c_p2_tilde.rows() < 1) {
        throw DimensionError(fmt::format("transformed output matrix must be m x {}, got {}x{}", dec.n_p2,
                                         c_p2_tilde.rows(), c_p2_tilde.cols()));
    }
    const Matrix c = c_p2_tilde * dec.p.rightCols(dec.n_p2).transpose();
    dec.c_p2_tilde = c_p2_tilde;
    dec.c_p1_residual = max_abs(c * dec.p.leftCols(dec.n_p1));

    QuantumLinearSystem plant{theta, r, c};
    validate(plant);
    return {std::move(plant), std::move(dec)};
}

std::vector<double> skew_frequencies(const Matrix& skew) {
    if (skew.size() == 0) {
        return {};
    }
    // i * skew is Hermitian with real eigenvalues equal to -Im(lambda).
    const Eigen::MatrixXcd herm = std::complex<double>(0.0, 1.0) * skew.cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
    std::vector<double> out(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
    for (double& v : out) {
        v = -v;
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> symmetric_eigenvalues(const Matrix& sym) {
    if (sym.size() == 0) {
        return {};
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    std::vector<double> out(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
    std::sort(out.begin(), out.end());
    return out;
}

double transformed_condition_check(const DecomposedPlant& dec) {
    if (dec.c_p2_tilde.cols() != dec.theta22.rows()) {
        throw DimensionError("transformed output and theta22 dimensions disagree");
    }
    return max_abs(dec.c_p2_tilde * dec.theta22 * dec.c_p2_tilde.transpose());
}

}  // namespace qobs
