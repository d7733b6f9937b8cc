#include "lrg/mse.hpp"

#include <algorithm>
#include <cmath>

namespace lrg {

namespace {

double spectral_norm(const Matrix& s) {
    Spectrum spectrum = sym_eig(s);
    double largest = 0.0;
    for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i)
        largest = std::max(largest, std::abs(spectrum.eigenvalues(i)));
    return largest;
}

}  // namespace

MseBreakdown mse_decomposition(const Matrix& sigma_xi, const Matrix& sigma_theta,
                               const Matrix& ep2, double c) {
    const Eigen::Index n = sigma_xi.rows();
    require_shape(sigma_xi, n, n, "Sigma_xi");
    require_shape(sigma_theta, n, n, "Sigma_Theta");
    require_shape(ep2, n, n, "E[P^2]");

    MseBreakdown out;
    out.ipa_lr_variance = (sigma_xi * ep2).trace();
    out.projection_variance =
        (sigma_theta * ep2).trace() - c * c * sigma_theta.trace();
    out.scalar_bias = (1.0 - c) * (1.0 - c) * sigma_theta.trace();
    out.total = out.ipa_lr_variance + out.projection_variance + out.scalar_bias;

    // The regrouped identity can cancel heavily, so the 1e-10 agreement is
    // relative to the quadratic-form magnitudes entering the sums.
    const double regrouped = ((sigma_xi + sigma_theta) * ep2).trace() +
                             (1.0 - 2.0 * c) * sigma_theta.trace();
    const double scale =
        std::max({1.0, std::abs(out.ipa_lr_variance),
                  std::abs((sigma_theta * ep2).trace()),
                  c * c * sigma_theta.trace(), std::abs(out.scalar_bias)});
    if (std::abs(out.total - regrouped) > 1e-10 * scale)
        throw Error("mse_decomposition: regrouped total disagrees with the "
                    "three-term sum");
    return out;
}

double bound_instance_independent(const Matrix& sigma_xi,
                                  const Matrix& sigma_theta, int n, int r,
                                  double c) {
    const double ratio = c * c * n / r;
    return ratio * spectral_norm(sigma_xi) +
           (1.0 - 2.0 * c + ratio) * spectral_norm(sigma_theta);
}

double baseline_mse(BaselineKind kind, const Matrix& sigma_xi,
                    const Matrix& sigma_theta, int n, int r) {
    switch (kind) {
        case BaselineKind::FullRank:
            return sigma_xi.trace();
        case BaselineKind::GaussianLowRank:
            return static_cast<double>(n + r + 1) / r * sigma_xi.trace() +
                   static_cast<double>(n + 1) / r * sigma_theta.trace();
    }
    throw Error("baseline_mse: unknown baseline");
}

double projector_second_moment_floor(int n, int r, double c) {
    if (r < 1 || r > n)
        throw Error("projector_second_moment_floor: need 1 <= r <= n");
    return static_cast<double>(n) * n * c * c / r;
}

double min_mse_instance_dependent(const Matrix& sigma_xi,
                                  const Matrix& sigma_theta, int r, double c) {
    const Matrix total = sigma_xi + sigma_theta;
    SpectralWeights weights =
        spectral_weights_from_matrix(0.5 * (total + total.transpose()));
    InclusionPlan plan = compute_inclusion_plan(weights.sigma, r, c);
    return phi_min(plan, weights.sigma, c) +
           (1.0 - 2.0 * c) * sigma_theta.trace();
}

GradientSample draw_gradient_estimate(const QuadraticProblem& p, const Matrix& w,
                                      EstimatorKind kind, ProjectionLaw law,
                                      const ProjectionSpec& spec,
                                      const SpectralWeights* weights,
                                      const ZoConfig& zo, Rng& rng) {
    const RowVector a = sample_a(p, rng);
    switch (kind) {
        case EstimatorKind::Ipa:
            return ipa_full(p, w, a);
        case EstimatorKind::Lr2pt:
            return lr2pt_full(p, w, a, zo, rng);
        case EstimatorKind::LowRankIpa:
            return lowrank_ipa(p, w, a,
                               sample_projection(spec, law, weights, rng));
        case EstimatorKind::LowRankLr2pt:
            return lowrank_lr2pt(p, w, a,
                                 sample_projection(spec, law, weights, rng), zo,
                                 rng);
    }
    throw Error("draw_gradient_estimate: unknown estimator tag");
}

MseCurve mc_mse_curve(const QuadraticProblem& p, const Matrix& w,
                      EstimatorKind kind, ProjectionLaw law,
                      const ProjectionSpec& spec, const std::vector<int>& ns,
                      int replications, const Rng& stream,
                      const SpectralWeights* weights, const ZoConfig& zo) {
    if (ns.empty())
        throw Error("mc_mse_curve: empty sample-count grid");
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] < 1 || (i > 0 && ns[i] <= ns[i - 1]))
            throw Error("mc_mse_curve: sample counts must be ascending and >= 1");
    }
    if (replications < 30)
        throw Error("mc_mse_curve: need at least 30 replications");
    if (is_low_rank(kind) && law == ProjectionLaw::InstanceDependent &&
        weights == nullptr)
        throw MissingWeightsError(
            "mc_mse_curve: instance-dependent law needs spectral weights");

    const Matrix g = true_gradient(p, w);
    const int n_max = ns.back();
    const std::size_t points = ns.size();

    std::vector<double> mean(points, 0.0);
    std::vector<double> m2(points, 0.0);

    for (int rep = 0; rep < replications; ++rep) {
        Rng rng = stream.child(static_cast<std::uint64_t>(rep));
        Matrix running_sum = Matrix::Zero(p.m, p.n);
        std::size_t next = 0;
        for (int i = 1; i <= n_max; ++i) {
            running_sum +=
                draw_gradient_estimate(p, w, kind, law, spec, weights, zo, rng).g;
            if (next < points && i == ns[next]) {
                const double err = (running_sum / i - g).squaredNorm();
                // Welford update across replications, fixed index order.
                const double delta = err - mean[next];
                mean[next] += delta / (rep + 1);
                m2[next] += delta * (err - mean[next]);
                ++next;
            }
        }
    }

    MseCurve curve;
    curve.sample_counts = ns;
    curve.mse = mean;
    curve.std_error.resize(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double variance = m2[i] / (replications - 1);
        curve.std_error[i] = std::sqrt(std::max(variance, 0.0) / replications);
    }
    curve.meta = CurveMeta{kind, law, spec.c, spec.r, stream.seed()};
    return curve;
}

}  // namespace lrg
