#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrg/linalg.hpp"
#include "lrg/rng.hpp"

namespace lrg {

/// Laws for the random projection frame V (n x r). Every law is isotropic
/// in expectation, E[V V^T] = c I_n, which is what keeps the projected
/// gradient estimators unbiased up to the scale c.
enum class ProjectionLaw { Gaussian, HaarStiefel, CoordinateAxis, InstanceDependent };

const char* to_string(ProjectionLaw law);
std::optional<ProjectionLaw> law_from_string(std::string_view name);

struct ProjectionSpec {
    int n = 0;     // ambient dimension
    int r = 0;     // subspace rank, 1 <= r <= n
    double c = 1;  // isotropy scale, > 0

    void validate() const;
};

struct ProjectionSample {
    Matrix v;  // n x r frame; the projector is P = V V^T
    ProjectionLaw law = ProjectionLaw::Gaussian;
    // Selected coordinate / eigen-direction indices, ascending; present for
    // the subset-based laws (CoordinateAxis, InstanceDependent).
    std::optional<std::vector<int>> selected_indices;

    Matrix projector() const { return v * v.transpose(); }
};

/// Orthonormal basis Q and nonnegative weights sigma (descending) of a
/// symmetric PSD weighting matrix Sigma = Q diag(sigma) Q^T.
struct SpectralWeights {
    Matrix basis;
    Vector sigma;
};

/// Water-filling solution for the optimal inclusion probabilities:
/// minimize sum_i sigma_i / pi_i subject to 0 < pi_i <= 1, sum_i pi_i = r.
/// Large-sigma directions saturate at pi = 1; the rest scale with
/// sqrt(sigma). Directions with sigma = 0 receive either a uniform share
/// of the leftover mass (when all unsaturated sigma vanish) or a 1e-12
/// floor that keeps the weights c / pi finite.
struct InclusionPlan {
    Vector pi;                          // n entries in (0, 1], sum = r
    int saturated = 0;                  // count of leading pi == 1 entries
    std::vector<int> zero_sigma_indices;
    Vector mu_weights;                  // c / pi
};

/// V with i.i.d. N(0, c/r) entries. E[P] = c I_n but the per-draw frame is
/// not orthogonal, so E[P^2] carries the extra (n+r+1)/r factor.
ProjectionSample sample_gaussian(const ProjectionSpec& spec, Rng& rng);

/// V = sqrt(cn/r) U with U uniform (rotation-invariant) on the set of
/// n x r orthonormal frames, obtained by sign-fixed thin QR of a Gaussian
/// matrix. Satisfies V^T V = (cn/r) I_r per draw. Rank-deficient Gaussian
/// draws are resampled up to 8 times before the error surfaces.
ProjectionSample sample_haar_stiefel(const ProjectionSpec& spec, Rng& rng);

/// V = sqrt(cn/r) [e_j : j in J] for a uniform size-r coordinate subset J.
/// P is diagonal with cn/r at the selected coordinates.
ProjectionSample sample_coordinate_axis(const ProjectionSpec& spec, Rng& rng);

/// Optimal inclusion probabilities for a descending nonnegative spectrum.
/// Scans the saturation count t upward: with S_t the sqrt-sum of the
/// unsaturated tail, the first t whose head probability
/// (r - t) sqrt(sigma_t) / S_t drops below 1 fixes the plan. Throws
/// InfeasibleSpectrumError when the whole spectrum is zero.
InclusionPlan compute_inclusion_plan(const Vector& sigma, int r, double c);

/// Closed-form optimum of the weighted projector second moment,
/// c^2 sum_{saturated} sigma_i + c^2/(r-t) (sum_{unsaturated} sqrt(sigma_i))^2,
/// with the second term dropped when t = r.
double phi_min(const InclusionPlan& plan, const Vector& sigma, double c);

/// Fixed-size unequal-probability subset: systematic (Madow) sampling over
/// a uniformly random permutation. Always returns |J| = r and hits the
/// first-order inclusion probabilities pi_i exactly. Expects pi in (0,1]
/// with sum within 1e-8 of r.
std::vector<int> sample_fixed_size_pips(const Vector& pi, int r, Rng& rng);

/// Spectrum-adapted sampler: draws J via sample_fixed_size_pips on the
/// optimal plan for weights.sigma and returns
/// V = Q_J diag(sqrt(c / pi_i)), i.e. P = sum_{i in J} (c/pi_i) q_i q_i^T.
ProjectionSample sample_instance_dependent(const ProjectionSpec& spec,
                                           const SpectralWeights& weights,
                                           Rng& rng);

/// Dispatch on the law tag; weights are required iff the law is
/// InstanceDependent (MissingWeightsError otherwise).
ProjectionSample sample_projection(const ProjectionSpec& spec, ProjectionLaw law,
                                   const SpectralWeights* weights, Rng& rng);

/// Closed-form E[P^2] per law:
///   HaarStiefel, CoordinateAxis -> (c^2 n / r) I_n
///   Gaussian                    -> c^2 (n + r + 1) / r I_n
///   InstanceDependent           -> Q diag(c^2 / pi_i) Q^T
Matrix analytic_second_moment(ProjectionLaw law, const ProjectionSpec& spec,
                              const SpectralWeights* weights = nullptr);

/// Eigendecompose a symmetric PSD weighting matrix into SpectralWeights.
SpectralWeights spectral_weights_from_matrix(const Matrix& sigma_total);

}  // namespace lrg
