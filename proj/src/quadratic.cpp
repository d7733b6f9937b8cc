#include "lrg/quadratic.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace lrg {

namespace {

void require_w(const QuadraticProblem& p, const Matrix& w) {
    require_shape(w, p.m, p.n, "decision variable W");
}

void require_a(const QuadraticProblem& p, const RowVector& a) {
    if (a.size() != p.m)
        throw ShapeError("data row A: expected length " + std::to_string(p.m) +
                         ", got " + std::to_string(a.size()));
}

/// Raw second moment E[G0^T G0] of the pathwise sample gradient
/// G0 = A^T (A M - C) B^T with M = W B. Writing x = A^T = mu + u,
/// u ~ N(0, S), and y = M^T x - C^T, the moment is
///   B E[||x||^2 y y^T] B^T
/// and the Gaussian fourth-moment identity E[||u||^2 u u^T] =
/// tr(S) S + 2 S^2 expands the expectation in closed form.
Matrix pathwise_second_moment(const QuadraticProblem& p, const Matrix& w) {
    const Matrix m_mat = w * p.b;                  // m x o
    const Matrix& s = p.sigma_a;                   // m x m
    const Vector d = m_mat.transpose() * p.mu - p.c.transpose();  // o
    const double tr_s = s.trace();
    const double mu2 = p.mu.squaredNorm();

    const Matrix s2 = s * s;
    const Vector s_mu = s * p.mu;
    const Matrix mt = m_mat.transpose();           // o x m

    Matrix core = mt * (tr_s * s + 2.0 * s2 + mu2 * s) * m_mat;
    core += (tr_s + mu2) * d * d.transpose();
    core += 2.0 * (mt * s_mu) * d.transpose();
    core += 2.0 * d * (mt * s_mu).transpose();
    return p.b * core * p.b.transpose();
}

}  // namespace

const char* to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Ipa: return "ipa";
        case EstimatorKind::Lr2pt: return "lr2pt";
        case EstimatorKind::LowRankIpa: return "lowrank-ipa";
        case EstimatorKind::LowRankLr2pt: return "lowrank-lr2pt";
    }
    return "unknown";
}

std::optional<EstimatorKind> estimator_from_string(std::string_view name) {
    if (name == "ipa") return EstimatorKind::Ipa;
    if (name == "lr2pt") return EstimatorKind::Lr2pt;
    if (name == "lowrank-ipa") return EstimatorKind::LowRankIpa;
    if (name == "lowrank-lr2pt") return EstimatorKind::LowRankLr2pt;
    return std::nullopt;
}

bool is_low_rank(EstimatorKind kind) {
    return kind == EstimatorKind::LowRankIpa ||
           kind == EstimatorKind::LowRankLr2pt;
}

EstimatorKind base_family(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Ipa:
        case EstimatorKind::LowRankIpa: return EstimatorKind::Ipa;
        case EstimatorKind::Lr2pt:
        case EstimatorKind::LowRankLr2pt: return EstimatorKind::Lr2pt;
    }
    return EstimatorKind::Ipa;
}

QuadraticProblem make_problem(Vector mu, Matrix sigma_a, Matrix b, Matrix c) {
    QuadraticProblem p;
    p.m = static_cast<int>(mu.size());
    p.n = static_cast<int>(b.rows());
    p.o = static_cast<int>(b.cols());
    require_shape(sigma_a, p.m, p.m, "Sigma_A");
    require_shape(c, 1, p.o, "C");
    p.mu = std::move(mu);
    p.sigma_a = std::move(sigma_a);
    p.b = std::move(b);
    p.c = std::move(c);
    p.chol_sigma_a = cholesky_psd(p.sigma_a);
    return p;
}

QuadraticProblem default_problem(int m, int n, int o, std::uint64_t seed) {
    Rng master(seed);
    Rng b_rng = master.child(0);
    Rng c_rng = master.child(1);
    Rng mu_rng = master.child(2);
    Rng cov_rng = master.child(3);

    Matrix g = cov_rng.gaussian_matrix(m, m);
    Matrix sigma_a =
        g * g.transpose() / static_cast<double>(m) + 0.1 * Matrix::Identity(m, m);
    return make_problem(mu_rng.gaussian_vector(m), std::move(sigma_a),
                        b_rng.gaussian_matrix(n, o), c_rng.gaussian_matrix(1, o));
}

Matrix true_gradient(const QuadraticProblem& p, const Matrix& w) {
    require_w(p, w);
    const Matrix bbt = p.b * p.b.transpose();
    return (p.sigma_a + p.mu * p.mu.transpose()) * w * bbt -
           p.mu * (p.c * p.b.transpose());
}

double objective(const QuadraticProblem& p, const Matrix& w) {
    require_w(p, w);
    const Matrix m_mat = w * p.b;
    const Matrix second = p.sigma_a + p.mu * p.mu.transpose();
    const double quad = (m_mat.transpose() * second * m_mat).trace();
    const double lin = (p.mu.transpose() * m_mat * p.c.transpose())(0);
    const double constant = (p.c * p.c.transpose())(0);
    return 0.5 * (quad - 2.0 * lin + constant);
}

double objective_minimum(const QuadraticProblem& p) {
    // f depends on W only through M = W B, and B has full column rank for
    // generic data, so minimize over M directly:
    // (Sigma_A + mu mu^T) M* = mu C.
    const Matrix second = p.sigma_a + p.mu * p.mu.transpose();
    const Matrix m_star = second.ldlt().solve(p.mu * p.c);
    const double quad = (m_star.transpose() * second * m_star).trace();
    const double lin = (p.mu.transpose() * m_star * p.c.transpose())(0);
    const double constant = (p.c * p.c.transpose())(0);
    return 0.5 * (quad - 2.0 * lin + constant);
}

RowVector sample_a(const QuadraticProblem& p, Rng& rng) {
    const Vector z = rng.gaussian_vector(p.m);
    return (p.mu + p.chol_sigma_a * z).transpose();
}

double loss(const QuadraticProblem& p, const Matrix& w, const RowVector& a) {
    require_w(p, w);
    require_a(p, a);
    return 0.5 * (a * w * p.b - p.c).squaredNorm();
}

GradientSample ipa_full(const QuadraticProblem& p, const Matrix& w,
                        const RowVector& a) {
    require_w(p, w);
    require_a(p, a);
    const RowVector residual = a * w * p.b - p.c;      // 1 x o
    Matrix g = a.transpose() * (residual * p.b.transpose());
    return {std::move(g), EstimatorKind::Ipa, std::nullopt};
}

GradientSample lr2pt_full(const QuadraticProblem& p, const Matrix& w,
                          const RowVector& a, const ZoConfig& zo, Rng& rng) {
    if (!(zo.sigma_perturb > 0.0))
        throw Error("lr2pt_full: perturbation scale must be positive");
    const Matrix z = rng.gaussian_matrix(p.m, p.n);
    const double s = zo.sigma_perturb;
    const double delta =
        (loss(p, w + s * z, a) - loss(p, w - s * z, a)) / (2.0 * s);
    return {delta * z, EstimatorKind::Lr2pt, std::nullopt};
}

GradientSample lowrank_ipa(const QuadraticProblem& p, const Matrix& w,
                           const RowVector& a, const ProjectionSample& proj) {
    require_w(p, w);
    require_a(p, a);
    if (proj.v.rows() != p.n)
        throw ShapeError("lowrank_ipa: projection frame has " +
                         std::to_string(proj.v.rows()) + " rows, expected " +
                         std::to_string(p.n));
    const RowVector residual = a * w * p.b - p.c;            // 1 x o
    const RowVector lifted = (residual * p.b.transpose()) * proj.v;  // 1 x r
    Matrix factor = a.transpose() * lifted;                  // m x r
    Matrix g = factor * proj.v.transpose();
    GradientSample out{std::move(g), EstimatorKind::LowRankIpa, proj};
    return out;
}

GradientSample lowrank_lr2pt(const QuadraticProblem& p, const Matrix& w,
                             const RowVector& a, const ProjectionSample& proj,
                             const ZoConfig& zo, Rng& rng) {
    if (!(zo.sigma_perturb > 0.0))
        throw Error("lowrank_lr2pt: perturbation scale must be positive");
    if (proj.v.rows() != p.n)
        throw ShapeError("lowrank_lr2pt: projection frame has " +
                         std::to_string(proj.v.rows()) + " rows, expected " +
                         std::to_string(p.n));
    const Matrix z = rng.gaussian_matrix(p.m, static_cast<int>(proj.v.cols()));
    const double s = zo.sigma_perturb;
    const Matrix offset = s * z * proj.v.transpose();
    const double delta =
        (loss(p, w + offset, a) - loss(p, w - offset, a)) / (2.0 * s);
    Matrix g = delta * z * proj.v.transpose();
    return {std::move(g), EstimatorKind::LowRankLr2pt, proj};
}

Matrix estimate_sigma_xi(const QuadraticProblem& p, const Matrix& w,
                         EstimatorKind kind, int n_warmup, Rng& rng,
                         const ZoConfig& zo) {
    if (is_low_rank(kind))
        throw Error("estimate_sigma_xi: full-rank estimator tags only");
    if (n_warmup < 2)
        throw Error("estimate_sigma_xi: need at least 2 warm-up samples");

    const Matrix g = true_gradient(p, w);
    Matrix accum = Matrix::Zero(p.n, p.n);
    for (int i = 0; i < n_warmup; ++i) {
        const RowVector a = sample_a(p, rng);
        const GradientSample sample = kind == EstimatorKind::Ipa
                                          ? ipa_full(p, w, a)
                                          : lr2pt_full(p, w, a, zo, rng);
        const Matrix diff = sample.g - g;
        accum.noalias() += diff.transpose() * diff;
    }
    accum /= static_cast<double>(n_warmup);
    // Gram-structured, so PSD up to rounding; clamp through the spectrum.
    return reconstruct(sym_eig(accum, /*assume_psd=*/true));
}

Matrix sigma_theta(const QuadraticProblem& p, const Matrix& w) {
    const Matrix g = true_gradient(p, w);
    return g.transpose() * g;
}

Matrix sigma_xi_exact(const QuadraticProblem& p, const Matrix& w,
                      EstimatorKind kind) {
    const Matrix g = true_gradient(p, w);
    const Matrix sig_theta = g.transpose() * g;
    const Matrix sigma_g = pathwise_second_moment(p, w);

    switch (base_family(kind)) {
        case EstimatorKind::Ipa:
            return sigma_g - sig_theta;
        case EstimatorKind::Lr2pt:
            // The quadratic loss makes the two-point difference exact, so
            // the estimator is <G0, Z> Z; averaging over Z gives
            // m tr(E[G0^T G0]) I + 2 E[G0^T G0], centered at g.
            return p.m * sigma_g.trace() * Matrix::Identity(p.n, p.n) +
                   2.0 * sigma_g - sig_theta;
        default:
            throw Error("sigma_xi_exact: full-rank estimator tags only");
    }
}

}  // namespace lrg
