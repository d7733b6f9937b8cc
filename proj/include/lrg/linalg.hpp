#pragma once

#include <Eigen/Core>

#include "lrg/errors.hpp"

namespace lrg {

// Dense double-precision matrices throughout; Eigen supplies the plumbing
// (operator* for products, .transpose(), .trace(), .norm() for the
// Frobenius norm). The factorizations below wrap Eigen's dense solvers
// behind fixed tolerances and error types.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Eigendecomposition of a symmetric matrix, eigenvalues descending and
/// eigenvectors orthonormal in the columns.
struct Spectrum {
    Vector eigenvalues;
    Matrix eigenvectors;
};

struct QrResult {
    Matrix q;  // n x r, orthonormal columns
    Matrix r;  // r x r, upper triangular, nonnegative diagonal
};

/// Thin QR with the sign ambiguity removed: G = Q R where R's diagonal is
/// nonnegative (sgn(0) counts as +1). With Gaussian input this makes Q a
/// Haar-distributed orthonormal frame.
///
/// Throws RankDeficientError when a diagonal of R falls below
/// 1e-12 * ||G||_F, and ShapeError unless rows >= cols >= 1.
QrResult thin_qr_signfix(const Matrix& g);

/// Spectral decomposition of a symmetric matrix. The input is symmetrized
/// as (S + S^T)/2 before factorization; asymmetry beyond 1e-10 per entry
/// throws NotSymmetricError. With assume_psd, eigenvalues in [-1e-10, 0)
/// are clamped to zero and anything below -1e-10 throws NotPsdError.
Spectrum sym_eig(const Matrix& s, bool assume_psd = false);

/// Factor of a symmetric positive semi-definite matrix with L L^T = S.
/// Positive-definite inputs get the classic lower-triangular Cholesky
/// factor; singular ones fall back to a pivoted LDL^T factor with the
/// same reconstruction contract. A pivot below -1e-10 throws NotPsdError.
Matrix cholesky_psd(const Matrix& s);

/// <A, B> = tr(A^T B).
double frobenius_inner_product(const Matrix& a, const Matrix& b);

Matrix reconstruct(const Spectrum& spectrum);

inline bool is_finite(const Matrix& a) { return a.allFinite(); }

inline void require_shape(const Matrix& a, Eigen::Index rows,
                          Eigen::Index cols, const char* what) {
    if (a.rows() != rows || a.cols() != cols)
        throw ShapeError(std::string(what) + ": expected " +
                         std::to_string(rows) + "x" + std::to_string(cols) +
                         ", got " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()));
}

}  // namespace lrg
