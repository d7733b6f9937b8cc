#include "lrg/lazy_descent.hpp"

#include <cmath>
#include <numbers>

namespace lrg {

StepSchedule constant_steps(double alpha) {
    return [alpha](int) { return alpha; };
}

StepSchedule cosine_steps(double alpha0, int horizon) {
    return [alpha0, horizon](int t) {
        const double phase = std::numbers::pi * std::min(t, horizon) /
                             std::max(horizon, 1);
        return 0.5 * alpha0 * (1.0 + std::cos(phase));
    };
}

StepSchedule inv_sqrt_steps(double alpha0) {
    return [alpha0](int t) { return alpha0 / std::sqrt(t + 1.0); };
}

TrainTrace run_lazy_update(const QuadraticProblem& p, const Matrix& theta0,
                           const LazyUpdateConfig& cfg, const Rng& stream) {
    require_shape(theta0, p.m, p.n, "theta0");
    if (cfg.outer_iters < 1 || cfg.inner_steps < 1 || cfg.batch < 1)
        throw Error("run_lazy_update: need outer_iters, inner_steps, batch >= 1");
    if (!cfg.step_size)
        throw Error("run_lazy_update: missing step-size schedule");
    if (is_low_rank(cfg.estimator))
        throw Error("run_lazy_update: estimator tag names the inner rule; "
                    "use ipa or lr2pt");
    if (cfg.spec.n != p.n)
        throw Error("run_lazy_update: projection spec n must match problem n");
    cfg.spec.validate();
    const ZoConfig zo = cfg.zo.value_or(ZoConfig{});
    const SpectralWeights* weights =
        cfg.weights.has_value() ? &*cfg.weights : nullptr;

    Rng proj_rng = stream.child(0);
    Rng data_rng = stream.child(1);

    TrainTrace trace;
    trace.records.reserve(static_cast<std::size_t>(cfg.outer_iters));
    Matrix theta = theta0;
    const int r = cfg.spec.r;

    for (int t = 0; t < cfg.outer_iters; ++t) {
        const double alpha = cfg.step_size(t);
        if (!(alpha > 0.0))
            throw Error("run_lazy_update: step size must be positive at t=" +
                        std::to_string(t));

        const ProjectionSample proj =
            sample_projection(cfg.spec, cfg.law, weights, proj_rng);
        const Matrix bt_v = p.b.transpose() * proj.v;  // o x r, reused inside

        Matrix coeff = Matrix::Zero(p.m, r);
        for (int k = 0; k < cfg.inner_steps; ++k) {
            const Matrix lifted = theta + coeff * proj.v.transpose();
            Matrix grad = Matrix::Zero(p.m, r);
            for (int bi = 0; bi < cfg.batch; ++bi) {
                const RowVector a = sample_a(p, data_rng);
                if (cfg.estimator == EstimatorKind::Ipa) {
                    const RowVector residual = a * lifted * p.b - p.c;
                    grad.noalias() += a.transpose() * (residual * bt_v);
                } else {
                    const Matrix z = data_rng.gaussian_matrix(p.m, r);
                    const Matrix offset =
                        zo.sigma_perturb * z * proj.v.transpose();
                    const double delta = (loss(p, lifted + offset, a) -
                                          loss(p, lifted - offset, a)) /
                                         (2.0 * zo.sigma_perturb);
                    grad.noalias() += delta * z;
                }
            }
            coeff.noalias() -= (alpha / cfg.batch) * grad;
            if (!is_finite(coeff))
                throw NonFiniteIterateError(
                    "run_lazy_update: non-finite iterate at outer=" +
                    std::to_string(t) + " inner=" + std::to_string(k));
        }

        TraceRecord rec;
        rec.outer = t;
        rec.objective = objective(p, theta);
        rec.grad_norm = true_gradient(p, theta).norm();
        rec.update_norm = coeff.norm();
        trace.records.push_back(rec);

        theta.noalias() += coeff * proj.v.transpose();
        if (!is_finite(theta))
            throw NonFiniteIterateError(
                "run_lazy_update: non-finite iterate after outer=" +
                std::to_string(t));
    }

    trace.theta_final = std::move(theta);
    return trace;
}

}  // namespace lrg
