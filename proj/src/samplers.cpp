#include "lrg/samplers.hpp"

#include <algorithm>
#include <cmath>

namespace lrg {

namespace {

constexpr double kPiFloor = 1e-12;
constexpr int kStiefelRetries = 8;

}  // namespace

const char* to_string(ProjectionLaw law) {
    switch (law) {
        case ProjectionLaw::Gaussian: return "gaussian";
        case ProjectionLaw::HaarStiefel: return "haar-stiefel";
        case ProjectionLaw::CoordinateAxis: return "coordinate-axis";
        case ProjectionLaw::InstanceDependent: return "instance-dependent";
    }
    return "unknown";
}

std::optional<ProjectionLaw> law_from_string(std::string_view name) {
    if (name == "gaussian") return ProjectionLaw::Gaussian;
    if (name == "haar-stiefel") return ProjectionLaw::HaarStiefel;
    if (name == "coordinate-axis") return ProjectionLaw::CoordinateAxis;
    if (name == "instance-dependent") return ProjectionLaw::InstanceDependent;
    return std::nullopt;
}

void ProjectionSpec::validate() const {
    if (n < 1 || r < 1 || r > n)
        throw Error("ProjectionSpec: need 1 <= r <= n, got n=" +
                    std::to_string(n) + " r=" + std::to_string(r));
    if (!(c > 0.0))
        throw Error("ProjectionSpec: c must be positive, got " +
                    std::to_string(c));
}

ProjectionSample sample_gaussian(const ProjectionSpec& spec, Rng& rng) {
    spec.validate();
    const double stddev = std::sqrt(spec.c / spec.r);
    Matrix v = stddev * rng.gaussian_matrix(spec.n, spec.r);
    return {std::move(v), ProjectionLaw::Gaussian, std::nullopt};
}

ProjectionSample sample_haar_stiefel(const ProjectionSpec& spec, Rng& rng) {
    spec.validate();
    const double alpha = std::sqrt(spec.c * spec.n / spec.r);
    for (int attempt = 0;; ++attempt) {
        try {
            QrResult qr = thin_qr_signfix(rng.gaussian_matrix(spec.n, spec.r));
            return {alpha * qr.q, ProjectionLaw::HaarStiefel, std::nullopt};
        } catch (const RankDeficientError&) {
            if (attempt >= kStiefelRetries) throw;
        }
    }
}

ProjectionSample sample_coordinate_axis(const ProjectionSpec& spec, Rng& rng) {
    spec.validate();
    const double alpha = std::sqrt(spec.c * spec.n / spec.r);
    std::vector<int> chosen = rng.subset_without_replacement(spec.n, spec.r);
    Matrix v = Matrix::Zero(spec.n, spec.r);
    for (int k = 0; k < spec.r; ++k)
        v(chosen[static_cast<std::size_t>(k)], k) = alpha;
    return {std::move(v), ProjectionLaw::CoordinateAxis, std::move(chosen)};
}

InclusionPlan compute_inclusion_plan(const Vector& sigma, int r, double c) {
    const int n = static_cast<int>(sigma.size());
    if (n < 1 || r < 1 || r > n)
        throw Error("compute_inclusion_plan: need 1 <= r <= n, got n=" +
                    std::to_string(n) + " r=" + std::to_string(r));
    if (!(c > 0.0))
        throw Error("compute_inclusion_plan: c must be positive");

    Vector sig = sigma;
    for (int i = 0; i < n; ++i) {
        if (sig(i) < -1e-12)
            throw Error("compute_inclusion_plan: negative spectrum entry " +
                        std::to_string(sig(i)));
        if (sig(i) < 0.0) sig(i) = 0.0;
        if (i > 0 && sig(i) > sig(i - 1) + 1e-12)
            throw Error("compute_inclusion_plan: spectrum not descending");
    }
    if (sig.maxCoeff() <= 0.0)
        throw InfeasibleSpectrumError(
            "compute_inclusion_plan: every spectrum entry is zero");

    Vector root = sig.cwiseSqrt();
    // Suffix sums of sqrt(sigma), accumulated backwards.
    Vector suffix = Vector::Zero(n + 1);
    for (int i = n - 1; i >= 0; --i) suffix(i) = suffix(i + 1) + root(i);

    // Saturate leading directions while the head probability reaches 1.
    // Counting exact ties as saturated keeps the plan self-consistent:
    // pi_i = 1 exactly for the first `saturated` indices and pi < 1 after.
    int t = 0;
    while (t < r) {
        const double tail = suffix(t);
        if (tail <= 0.0) break;
        const double head = (r - t) * root(t) / tail;
        if (head < 1.0) break;
        ++t;
    }

    Vector pi(n);
    for (int i = 0; i < t; ++i) pi(i) = 1.0;
    const double tail = suffix(t);
    if (t < r && tail > 0.0) {
        for (int i = t; i < n; ++i) pi(i) = (r - t) * root(i) / tail;
    } else if (t < r) {
        // Every unsaturated direction has sigma = 0: spread the leftover
        // mass r - t uniformly over them.
        const double share = static_cast<double>(r - t) / (n - t);
        for (int i = t; i < n; ++i) pi(i) = share;
    } else {
        for (int i = t; i < n; ++i) pi(i) = 0.0;
    }

    InclusionPlan plan;
    plan.saturated = t;
    for (int i = 0; i < n; ++i) {
        pi(i) = std::min(pi(i), 1.0);
        if (pi(i) < kPiFloor) pi(i) = kPiFloor;
        if (sig(i) == 0.0) plan.zero_sigma_indices.push_back(i);
    }
    plan.pi = std::move(pi);
    plan.mu_weights = c * plan.pi.cwiseInverse();
    return plan;
}

double phi_min(const InclusionPlan& plan, const Vector& sigma, double c) {
    const int n = static_cast<int>(sigma.size());
    if (plan.pi.size() != n)
        throw ShapeError("phi_min: plan and spectrum sizes disagree");
    const int t = plan.saturated;

    double saturated_sum = 0.0;
    for (int i = 0; i < t; ++i) saturated_sum += std::max(sigma(i), 0.0);

    double tail_root_sum = 0.0;
    for (int i = t; i < n; ++i) tail_root_sum += std::sqrt(std::max(sigma(i), 0.0));

    double value = c * c * saturated_sum;
    // The mass budget r is implicit in the plan (sum of pi up to the 1e-12
    // floors); with everything saturated there is no unsaturated term left.
    const auto r = static_cast<int>(std::lround(plan.pi.sum()));
    if (tail_root_sum > 0.0 && r > t)
        value += c * c / (r - t) * tail_root_sum * tail_root_sum;
    return value;
}

std::vector<int> sample_fixed_size_pips(const Vector& pi, int r, Rng& rng) {
    const int n = static_cast<int>(pi.size());
    if (r < 1 || r > n)
        throw InvalidProbabilitiesError("sample_fixed_size_pips: need 1 <= r <= n");
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!(pi(i) > 0.0) || pi(i) > 1.0 + 1e-12)
            throw InvalidProbabilitiesError(
                "sample_fixed_size_pips: pi[" + std::to_string(i) +
                "] = " + std::to_string(pi(i)) + " outside (0, 1]");
        total += pi(i);
    }
    if (std::abs(total - r) > 1e-8)
        throw InvalidProbabilitiesError(
            "sample_fixed_size_pips: sum(pi) = " + std::to_string(total) +
            " differs from r = " + std::to_string(r));

    // Madow systematic sampling: cumulate pi along a random permutation and
    // select the intervals containing u, u+1, ..., u+r-1. Interval lengths
    // are <= 1, so no index can be picked twice and |J| = r always.
    const std::vector<int> order = rng.permutation(n);
    const double u = rng.uniform();

    std::vector<int> selected;
    selected.reserve(static_cast<std::size_t>(r));
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    double cum = 0.0;
    int k = 0;
    for (int idx : order) {
        const double next = cum + std::min(pi(idx), 1.0);
        if (k < r && u + k < next) {
            selected.push_back(idx);
            taken[static_cast<std::size_t>(idx)] = 1;
            ++k;
        }
        cum = next;
    }
    // Rounding drift at the very end of the cumulative scale can drop the
    // last target; top up from the tail of the permutation.
    for (auto it = order.rbegin(); k < r && it != order.rend(); ++it) {
        if (!taken[static_cast<std::size_t>(*it)]) {
            selected.push_back(*it);
            taken[static_cast<std::size_t>(*it)] = 1;
            ++k;
        }
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

ProjectionSample sample_instance_dependent(const ProjectionSpec& spec,
                                           const SpectralWeights& weights,
                                           Rng& rng) {
    spec.validate();
    if (weights.basis.rows() != spec.n || weights.basis.cols() != spec.n ||
        weights.sigma.size() != spec.n)
        throw ShapeError("sample_instance_dependent: weights do not match spec.n");

    InclusionPlan plan = compute_inclusion_plan(weights.sigma, spec.r, spec.c);
    std::vector<int> chosen = sample_fixed_size_pips(plan.pi, spec.r, rng);

    Matrix v(spec.n, spec.r);
    for (int k = 0; k < spec.r; ++k) {
        const int i = chosen[static_cast<std::size_t>(k)];
        v.col(k) = std::sqrt(plan.mu_weights(i)) * weights.basis.col(i);
    }
    return {std::move(v), ProjectionLaw::InstanceDependent, std::move(chosen)};
}

ProjectionSample sample_projection(const ProjectionSpec& spec, ProjectionLaw law,
                                   const SpectralWeights* weights, Rng& rng) {
    switch (law) {
        case ProjectionLaw::Gaussian: return sample_gaussian(spec, rng);
        case ProjectionLaw::HaarStiefel: return sample_haar_stiefel(spec, rng);
        case ProjectionLaw::CoordinateAxis: return sample_coordinate_axis(spec, rng);
        case ProjectionLaw::InstanceDependent:
            if (weights == nullptr)
                throw MissingWeightsError(
                    "sample_projection: instance-dependent law needs spectral weights");
            return sample_instance_dependent(spec, *weights, rng);
    }
    throw Error("sample_projection: unknown law");
}

Matrix analytic_second_moment(ProjectionLaw law, const ProjectionSpec& spec,
                              const SpectralWeights* weights) {
    spec.validate();
    const double c2 = spec.c * spec.c;
    switch (law) {
        case ProjectionLaw::HaarStiefel:
        case ProjectionLaw::CoordinateAxis:
            return (c2 * spec.n / spec.r) * Matrix::Identity(spec.n, spec.n);
        case ProjectionLaw::Gaussian:
            return (c2 * (spec.n + spec.r + 1) / spec.r) *
                   Matrix::Identity(spec.n, spec.n);
        case ProjectionLaw::InstanceDependent: {
            if (weights == nullptr)
                throw MissingWeightsError(
                    "analytic_second_moment: instance-dependent law needs weights");
            InclusionPlan plan =
                compute_inclusion_plan(weights->sigma, spec.r, spec.c);
            // Directions held at the probability floor are zero-weight
            // (sigma = 0) atoms of mass 1e-12 that exist only to keep the
            // plan's c/pi finite. They contribute nothing to any trace
            // against the weighting matrix, and including their 1e12
            // nominal second moment would only amplify rounding residuals,
            // so they are excluded here.
            Vector diag(plan.pi.size());
            for (Eigen::Index i = 0; i < plan.pi.size(); ++i)
                diag(i) = plan.pi(i) <= 1e-9 ? 0.0 : c2 / plan.pi(i);
            return weights->basis * diag.asDiagonal() *
                   weights->basis.transpose();
        }
    }
    throw Error("analytic_second_moment: unknown law");
}

SpectralWeights spectral_weights_from_matrix(const Matrix& sigma_total) {
    Spectrum spectrum = sym_eig(sigma_total, /*assume_psd=*/true);
    // Snap rounding-level eigenvalues to exact zeros: the water-filling
    // sums run over sqrt(sigma), which would amplify 1e-14 dust into 1e-7
    // probability mass on directions that are numerically rank-deficient.
    const double cutoff = 1e-12 * std::max(spectrum.eigenvalues(0), 0.0);
    for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i)
        if (spectrum.eigenvalues(i) <= cutoff) spectrum.eigenvalues(i) = 0.0;
    return {spectrum.eigenvectors, spectrum.eigenvalues};
}

}  // namespace lrg
