#pragma once

#include <functional>
#include <vector>

#include "lrg/quadratic.hpp"

namespace lrg {

/// Step-size schedule: outer iteration index -> positive step size.
using StepSchedule = std::function<double(int)>;

StepSchedule constant_steps(double alpha);
StepSchedule cosine_steps(double alpha0, int horizon);
StepSchedule inv_sqrt_steps(double alpha0);

/// Two-level lazy-update descent: each outer iteration samples one
/// projection frame V_t, runs `inner_steps` stochastic descent steps on the
/// m x r coefficient matrix of the subspace (evaluating the objective at
/// the lifted point Theta_t + coeff V_t^T), then commits the rank-r update
/// Theta_{t+1} = Theta_t + coeff V_t^T and resamples.
struct LazyUpdateConfig {
    int outer_iters = 1;              // T >= 1
    int inner_steps = 1;              // K >= 1
    StepSchedule step_size;           // alpha_t > 0
    ProjectionLaw law = ProjectionLaw::HaarStiefel;
    ProjectionSpec spec;
    EstimatorKind estimator = EstimatorKind::Ipa;  // inner rule: Ipa or Lr2pt
    std::optional<ZoConfig> zo;       // used by the Lr2pt rule
    int batch = 1;                    // data draws averaged per inner step
    std::optional<SpectralWeights> weights;  // for the instance-dependent law
};

struct TraceRecord {
    int outer = 0;
    double objective = 0.0;    // closed-form f(Theta_t), no sampling noise
    double grad_norm = 0.0;    // ||grad f(Theta_t)||_F
    double update_norm = 0.0;  // ||coeff_(t,K)||_F of the committed factor
};

struct TrainTrace {
    std::vector<TraceRecord> records;  // one per outer iteration
    Matrix theta_final;
};

/// Runs the lazy-update descent. Child streams are derived from `stream`:
/// key 0 drives projection draws, key 1 drives data rows and two-point
/// perturbations, so a reference loop can replay the data stream exactly.
/// Throws NonFiniteIterateError as soon as an iterate stops being finite.
TrainTrace run_lazy_update(const QuadraticProblem& p, const Matrix& theta0,
                           const LazyUpdateConfig& cfg, const Rng& stream);

}  // namespace lrg
