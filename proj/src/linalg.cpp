#include "lrg/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace lrg {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kRankTol = 1e-12;
constexpr double kPsdClampTol = 1e-10;

void require_square(const Matrix& s, const char* what) {
    if (s.rows() != s.cols())
        throw ShapeError(std::string(what) + ": matrix is not square (" +
                         std::to_string(s.rows()) + "x" +
                         std::to_string(s.cols()) + ")");
}

void require_symmetric(const Matrix& s, const char* what) {
    require_square(s, what);
    const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol)
        throw NotSymmetricError(std::string(what) +
                                ": asymmetry exceeds tolerance (max |S - S^T| = " +
                                std::to_string(asym) + ")");
}

}  // namespace

QrResult thin_qr_signfix(const Matrix& g) {
    if (g.cols() < 1 || g.rows() < g.cols())
        throw ShapeError("thin_qr_signfix: need rows >= cols >= 1, got " +
                         std::to_string(g.rows()) + "x" +
                         std::to_string(g.cols()));
    if (!is_finite(g))
        throw Error("thin_qr_signfix: non-finite entries in input");

    const Eigen::Index r = g.cols();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), r);
    Matrix rmat = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();

    // Fold sgn(diag(R)) into Q so R's diagonal comes out nonnegative;
    // sgn(0) is treated as +1.
    for (Eigen::Index j = 0; j < r; ++j) {
        if (rmat(j, j) < 0.0) {
            q.col(j) = -q.col(j);
            rmat.row(j) = -rmat.row(j);
        }
    }

    const double scale = g.norm();
    if (scale == 0.0)
        throw RankDeficientError("thin_qr_signfix: zero input matrix");
    for (Eigen::Index j = 0; j < r; ++j) {
        if (rmat(j, j) < kRankTol * scale)
            throw RankDeficientError(
                "thin_qr_signfix: diagonal of R below rank tolerance at column " +
                std::to_string(j));
    }
    return {std::move(q), std::move(rmat)};
}

Spectrum sym_eig(const Matrix& s, bool assume_psd) {
    require_symmetric(s, "sym_eig");
    const Matrix sym = 0.5 * (s + s.transpose());

    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success)
        throw Error("sym_eig: eigendecomposition did not converge");

    // Eigen returns ascending order; flip to descending.
    Spectrum out;
    out.eigenvalues = solver.eigenvalues().reverse();
    out.eigenvectors = solver.eigenvectors().rowwise().reverse();

    if (assume_psd) {
        for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
            double& lambda = out.eigenvalues(i);
            if (lambda < -kPsdClampTol)
                throw NotPsdError("sym_eig: eigenvalue " + std::to_string(lambda) +
                                  " below PSD tolerance");
            if (lambda < 0.0) lambda = 0.0;
        }
    }
    return out;
}

Matrix cholesky_psd(const Matrix& s) {
    require_symmetric(s, "cholesky_psd");
    const Matrix sym = 0.5 * (s + s.transpose());

    Eigen::LLT<Matrix> llt(sym);
    if (llt.info() == Eigen::Success) return llt.matrixL();

    // Singular or borderline input: pivoted LDL^T with clamped pivots has
    // the same F F^T = S contract, minus strict triangularity. LDLT flags
    // zero pivots as a numerical issue, which is exactly the semi-definite
    // case this fallback exists for, so the pivots are checked directly.
    Eigen::LDLT<Matrix> ldlt(sym);
    Vector d = ldlt.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d(i) < -kPsdClampTol)
            throw NotPsdError("cholesky_psd: negative pivot " +
                              std::to_string(d(i)));
        if (d(i) < 0.0) d(i) = 0.0;
    }
    Matrix lower = ldlt.matrixL();
    Matrix factor = lower * d.cwiseSqrt().asDiagonal();
    return ldlt.transpositionsP().transpose() * factor;
}

double frobenius_inner_product(const Matrix& a, const Matrix& b) {
    require_shape(b, a.rows(), a.cols(), "frobenius_inner_product");
    return a.cwiseProduct(b).sum();
}

Matrix reconstruct(const Spectrum& spectrum) {
    return spectrum.eigenvectors * spectrum.eigenvalues.asDiagonal() *
           spectrum.eigenvectors.transpose();
}

}  // namespace lrg
