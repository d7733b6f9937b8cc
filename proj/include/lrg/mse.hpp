#pragma once

#include <cstdint>
#include <vector>

#include "lrg/quadratic.hpp"

namespace lrg {

/// Three-way split of the one-shot mean-squared error of a projected
/// estimator with noise covariance Sigma_xi, signal Gram Sigma_Theta and
/// projector second moment E[P^2]:
///   tr(Sigma_xi E[P^2])                estimator (data) variance
///   tr(Sigma_Theta (E[P^2] - c^2 I))   projection-induced variance
///   (1 - c)^2 tr(Sigma_Theta)          scalar bias
struct MseBreakdown {
    double ipa_lr_variance = 0.0;
    double projection_variance = 0.0;
    double scalar_bias = 0.0;
    double total = 0.0;
};

/// Computes the split above and cross-checks the sum against the regrouped
/// single-quadratic-form value tr((Sigma_xi + Sigma_Theta) E[P^2]) +
/// (1 - 2c) tr(Sigma_Theta) to 1e-10 relative.
MseBreakdown mse_decomposition(const Matrix& sigma_xi, const Matrix& sigma_theta,
                               const Matrix& ep2, double c);

/// Spectral-norm upper bound that needs no spectrum information:
/// c^2 n / r ||Sigma_xi||_2 + (1 - 2c + c^2 n / r) ||Sigma_Theta||_2.
double bound_instance_independent(const Matrix& sigma_xi,
                                  const Matrix& sigma_theta, int n, int r,
                                  double c);

enum class BaselineKind { FullRank, GaussianLowRank };

/// Closed-form baselines: the unprojected estimator has MSE tr(Sigma_xi);
/// projecting through an i.i.d. Gaussian frame (at c = 1) costs
/// (n+r+1)/r tr(Sigma_xi) + (n+1)/r tr(Sigma_Theta).
double baseline_mse(BaselineKind kind, const Matrix& sigma_xi,
                    const Matrix& sigma_theta, int n, int r);

/// Smallest achievable tr(E[P^2]) over admissible rank-r laws: n^2 c^2 / r,
/// attained exactly when V^T V = (cn/r) I_r per draw.
double projector_second_moment_floor(int n, int r, double c);

/// Minimal one-shot MSE over admissible laws: eigendecompose
/// Sigma_xi + Sigma_Theta, water-fill the inclusion probabilities, and add
/// the (1 - 2c) tr(Sigma_Theta) correction.
double min_mse_instance_dependent(const Matrix& sigma_xi,
                                  const Matrix& sigma_theta, int r, double c);

struct CurveMeta {
    EstimatorKind estimator = EstimatorKind::LowRankIpa;
    ProjectionLaw law = ProjectionLaw::HaarStiefel;
    double c = 1.0;
    int r = 0;
    std::uint64_t seed = 0;
};

/// MSE of the N-sample mean estimator across R replications, for each N in
/// an ascending grid. Decays like 1/N for unbiased settings and plateaus at
/// (1-c)^2 tr(Sigma_Theta) when c < 1.
struct MseCurve {
    std::vector<int> sample_counts;
    std::vector<double> mse;
    std::vector<double> std_error;  // across replications
    CurveMeta meta;
};

/// One draw of the configured estimator at W: fresh data row, projection
/// frame and perturbation per call. `law` is ignored by the full-rank tags;
/// weights are required iff the law is InstanceDependent and the tag is
/// low-rank.
GradientSample draw_gradient_estimate(const QuadraticProblem& p, const Matrix& w,
                                      EstimatorKind kind, ProjectionLaw law,
                                      const ProjectionSpec& spec,
                                      const SpectralWeights* weights,
                                      const ZoConfig& zo, Rng& rng);

/// Monte Carlo MSE-versus-samples curve. Replication `rep` runs on the
/// child stream stream.child(rep); within a replication one pass of
/// ns.back() draws feeds every grid point, and the reduction over
/// replications is in fixed index order.
MseCurve mc_mse_curve(const QuadraticProblem& p, const Matrix& w,
                      EstimatorKind kind, ProjectionLaw law,
                      const ProjectionSpec& spec, const std::vector<int>& ns,
                      int replications, const Rng& stream,
                      const SpectralWeights* weights = nullptr,
                      const ZoConfig& zo = {});

}  // namespace lrg
