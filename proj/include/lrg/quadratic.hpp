#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "lrg/samplers.hpp"

namespace lrg {

/// Quadratic matrix-regression objective
///   f(W) = E_A [ 1/2 || A W B - C ||_F^2 ],  A ~ N(mu^T, Sigma_A),
/// with A a 1 x m Gaussian row, W the m x n decision variable, and fixed
/// B (n x o), C (1 x o). The gradient has the closed form
///   grad f(W) = (Sigma_A + mu mu^T) W (B B^T) - mu (C B^T),
/// which makes the problem a ground-truth bench for stochastic gradient
/// estimators.
struct QuadraticProblem {
    int m = 0, n = 0, o = 0;
    Vector mu;            // m
    Matrix sigma_a;       // m x m, symmetric PSD
    Matrix b;             // n x o
    Matrix c;             // 1 x o
    Matrix chol_sigma_a;  // cached factor, L L^T = Sigma_A
};

/// Assemble a problem from explicit data (factor cached on construction).
QuadraticProblem make_problem(Vector mu, Matrix sigma_a, Matrix b, Matrix c);

/// Deterministic random instance: B, C, mu with i.i.d. standard normal
/// entries and Sigma_A = G G^T / m + 0.1 I for a standard normal G, so the
/// noise spectrum is well conditioned but clearly non-flat.
QuadraticProblem default_problem(int m = 100, int n = 100, int o = 30,
                                 std::uint64_t seed = 0);

enum class EstimatorKind { Ipa, Lr2pt, LowRankIpa, LowRankLr2pt };

const char* to_string(EstimatorKind kind);
std::optional<EstimatorKind> estimator_from_string(std::string_view name);
bool is_low_rank(EstimatorKind kind);
/// Full-rank family underlying a (possibly projected) estimator tag.
EstimatorKind base_family(EstimatorKind kind);

/// Perturbation scale for the two-point zeroth-order estimators. The loss
/// is quadratic in W, so central differences are exact and the value only
/// matters for future non-quadratic objectives.
struct ZoConfig {
    double sigma_perturb = 1e-3;
};

struct GradientSample {
    Matrix g;  // m x n
    EstimatorKind estimator = EstimatorKind::Ipa;
    std::optional<ProjectionSample> projection;
};

Matrix true_gradient(const QuadraticProblem& p, const Matrix& w);

/// Closed-form objective value (no Monte Carlo noise):
/// f(W) = 1/2 (tr(M^T (Sigma_A + mu mu^T) M) - 2 mu^T M C^T + C C^T),
/// M = W B.
double objective(const QuadraticProblem& p, const Matrix& w);

/// min_W f(W); the optimum is attained whenever W B equals the best M.
double objective_minimum(const QuadraticProblem& p);

/// One draw of the data row: A = mu^T + z^T L^T with z standard normal.
RowVector sample_a(const QuadraticProblem& p, Rng& rng);

double loss(const QuadraticProblem& p, const Matrix& w, const RowVector& a);

/// Pathwise (sample-gradient) estimator: G = A^T (A W B - C) B^T.
GradientSample ipa_full(const QuadraticProblem& p, const Matrix& w,
                        const RowVector& a);

/// Two-point zeroth-order estimator with full m x n perturbation Z:
/// G = [loss(W + s Z) - loss(W - s Z)] / (2s) * Z.
GradientSample lr2pt_full(const QuadraticProblem& p, const Matrix& w,
                          const RowVector& a, const ZoConfig& zo, Rng& rng);

/// Projected pathwise estimator G = (A^T (A W B - C) B^T V) V^T, built
/// left-to-right so the m x r factor is the largest new allocation.
GradientSample lowrank_ipa(const QuadraticProblem& p, const Matrix& w,
                           const RowVector& a, const ProjectionSample& proj);

/// Projected two-point estimator with m x r perturbation Z and rank-r
/// offset s Z V^T: G = [loss(W + sZV^T) - loss(W - sZV^T)] / (2s) * Z V^T.
GradientSample lowrank_lr2pt(const QuadraticProblem& p, const Matrix& w,
                             const RowVector& a, const ProjectionSample& proj,
                             const ZoConfig& zo, Rng& rng);

/// Monte Carlo estimate of the estimator noise covariance
/// Sigma_xi = E[(ghat - g)^T (ghat - g)] against the closed-form g,
/// clamped to PSD through sym_eig. Full-rank tags only.
Matrix estimate_sigma_xi(const QuadraticProblem& p, const Matrix& w,
                         EstimatorKind kind, int n_warmup, Rng& rng,
                         const ZoConfig& zo = {});

/// Signal Gram matrix Sigma_Theta = g^T g.
Matrix sigma_theta(const QuadraticProblem& p, const Matrix& w);

/// Exact Sigma_xi from Gaussian moment identities (full-rank tags only).
/// For the pathwise estimator this reduces to fourth moments of A; the
/// two-point value follows from
///   Sigma_xi_2pt = m tr(Sigma_G) I + 2 Sigma_G - Sigma_Theta,
/// where Sigma_G = E[G0^T G0] is the raw second moment of the pathwise
/// sample gradient.
Matrix sigma_xi_exact(const QuadraticProblem& p, const Matrix& w,
                      EstimatorKind kind);

}  // namespace lrg
