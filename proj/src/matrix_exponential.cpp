#include <array>
#include <cmath>

#include <fmt/core.h>

#include "qobs/simulation.hpp"

// Scaling and squaring with the degree-13 diagonal Pade approximant
// (Higham, SIAM J. Matrix Anal. Appl. 26(4), 2005), evaluated in long double.

namespace qobs {
namespace {

constexpr std::array<long double, 14> kPade13 = {
    64764752532480000.0L, 32382376266240000.0L, 7771770303897600.0L, 1187353796428800.0L,
    129060195264000.0L,   10559470521600.0L,    670442572800.0L,     33522128640.0L,
    1323241920.0L,        40840800.0L,          960960.0L,           16380.0L,
    182.0L,               1.0L};

// 1-norm bound for the degree-13 approximant at 64-bit mantissa precision.
// The published double-precision bound is 5.37; the truncation term scales
// like |A|^26, so 2^-64 instead of 2^-53 lowers it to about 4.05; 3.5 keeps a margin.
constexpr long double kTheta13 = 3.5L;

long double one_norm(const ExtendedMatrix& a) {
    return a.cwiseAbs().colwise().sum().maxCoeff();
}

ExtendedMatrix pade13(const ExtendedMatrix& a) {
    const auto& b = kPade13;
    const Eigen::Index n = a.rows();
    const ExtendedMatrix ident = ExtendedMatrix::Identity(n, n);
    const ExtendedMatrix a2 = a * a;
    const ExtendedMatrix a4 = a2 * a2;
    const ExtendedMatrix a6 = a4 * a2;
    const ExtendedMatrix u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                                  b[3] * a2 + b[1] * ident);
    const ExtendedMatrix v =
        a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
    return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

ExtendedMatrix matrix_exponential_extended(const ExtendedMatrix& a) {
    if (a.rows() != a.cols()) {
        throw DimensionError(fmt::format("matrix exponential needs a square matrix, got {}x{}", a.rows(), a.cols()));
    }
    if (!a.allFinite()) {
        throw DimensionError("matrix exponential input has non-finite entries");
    }
    if (a.size() == 0) {
        return a;
    }
    const long double norm = one_norm(a);
    if (norm == 0.0L) {
        return ExtendedMatrix::Identity(a.rows(), a.cols());
    }
    int squarings = 0;
    if (norm > kTheta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
    }
    ExtendedMatrix result = pade13(a / std::ldexp(1.0L, squarings));
    for (int i = 0; i < squarings; ++i) {
        result = (result * result).eval();
    }
    return result;
}

Matrix matrix_exponential(const Matrix& a) {
    return matrix_exponential_extended(a.cast<long double>()).cast<double>();
}

}  // namespace qobs
