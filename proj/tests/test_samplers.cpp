#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lrg/samplers.hpp"
#include "support.hpp"

using namespace lrg;

namespace {

Matrix monte_carlo_mean_projector(ProjectionLaw law, const ProjectionSpec& spec,
                                  const SpectralWeights* weights, int draws,
                                  std::uint64_t seed) {
    Rng rng(seed);
    Matrix mean = Matrix::Zero(spec.n, spec.n);
    for (int i = 0; i < draws; ++i)
        mean += sample_projection(spec, law, weights, rng).projector();
    return mean / draws;
}

// tr(P^2) = ||V^T V||_F^2, so the r x r gram is all that is needed.
double monte_carlo_trace_second_moment(ProjectionLaw law,
                                       const ProjectionSpec& spec,
                                       const SpectralWeights* weights,
                                       int draws, std::uint64_t seed) {
    Rng rng(seed);
    double total = 0.0;
    for (int i = 0; i < draws; ++i) {
        const Matrix v = sample_projection(spec, law, weights, rng).v;
        total += (v.transpose() * v).squaredNorm();
    }
    return total / draws;
}

}  // namespace

TEST_CASE("gaussian law: mean projector, entry variance, second moment") {
    const ProjectionSpec spec{8, 2, 1.0};
    const int draws = 100000;
    const Matrix mean =
        monte_carlo_mean_projector(ProjectionLaw::Gaussian, spec, nullptr, draws, 11);
    CHECK((mean - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() <= 0.02);

    // tr E[P^2] = c^2 n (n + r + 1) / r = 44 for these parameters.
    const double trace =
        monte_carlo_trace_second_moment(ProjectionLaw::Gaussian, spec, nullptr, draws, 12);
    CHECK(trace == doctest::Approx(44.0).epsilon(0.02));

    // c = r: entry variance c / r = 1.
    const ProjectionSpec unit{4, 4, 4.0};
    Rng rng(13);
    double sum = 0.0, sum_sq = 0.0;
    const int entry_draws = 62500;  // 1e6 entries
    for (int i = 0; i < entry_draws; ++i) {
        const Matrix v = sample_gaussian(unit, rng).v;
        sum += v.sum();
        sum_sq += v.squaredNorm();
    }
    const double count = entry_draws * 16.0;
    const double variance = sum_sq / count - (sum / count) * (sum / count);
    CHECK(variance == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("haar-stiefel law: exact frame gram and isotropy") {
    Rng rng(21);
    const ProjectionSpec spec{16, 4, 1.0};
    for (int i = 0; i < 1000; ++i) {
        const Matrix v = sample_haar_stiefel(spec, rng).v;
        CHECK((v.transpose() * v - 4.0 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-10);
    }

    // Square frame: P = I exactly up to rounding.
    const ProjectionSpec square{6, 6, 1.0};
    const Matrix p = sample_haar_stiefel(square, rng).projector();
    CHECK((p - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-10);

    const ProjectionSpec half{8, 2, 0.5};
    const Matrix mean = monte_carlo_mean_projector(ProjectionLaw::HaarStiefel, half,
                                                   nullptr, 100000, 22);
    CHECK((mean - 0.5 * Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() <= 0.02);
}

TEST_CASE("coordinate law: construction, inclusion frequency, frame gram") {
    // Direct construction check at alpha^2 = cn/r = 2.
    Rng rng(31);
    const ProjectionSpec spec{4, 2, 1.0};
    const ProjectionSample sample = sample_coordinate_axis(spec, rng);
    REQUIRE(sample.selected_indices.has_value());
    const Matrix p = sample.projector();
    for (int j = 0; j < 4; ++j) {
        const bool selected =
            std::find(sample.selected_indices->begin(), sample.selected_indices->end(),
                      j) != sample.selected_indices->end();
        CHECK(p(j, j) == doctest::Approx(selected ? 2.0 : 0.0));
    }
    CHECK((sample.v.transpose() * sample.v - 2.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);

    // Each coordinate appears with probability r/n.
    const int draws = 100000;
    Vector counts = Vector::Zero(4);
    Rng rng2(32);
    for (int i = 0; i < draws; ++i) {
        const auto s = sample_coordinate_axis(spec, rng2);
        for (int idx : *s.selected_indices) counts(idx) += 1.0;
    }
    const double se = std::sqrt(0.5 * 0.5 / draws);
    for (int j = 0; j < 4; ++j)
        CHECK(std::abs(counts(j) / draws - 0.5) <= 3.0 * se);
}

TEST_CASE("structured laws beat the gaussian second moment and hit the floor") {
    const ProjectionSpec spec{8, 2, 1.0};
    const int draws = 100000;
    const double floor = 32.0;  // n^2 c^2 / r
    const double stiefel = monte_carlo_trace_second_moment(
        ProjectionLaw::HaarStiefel, spec, nullptr, draws, 41);
    const double coord = monte_carlo_trace_second_moment(
        ProjectionLaw::CoordinateAxis, spec, nullptr, draws, 42);
    const double gaussian = monte_carlo_trace_second_moment(
        ProjectionLaw::Gaussian, spec, nullptr, draws, 43);
    CHECK(stiefel == doctest::Approx(floor).epsilon(0.01));
    CHECK(coord == doctest::Approx(floor).epsilon(0.01));
    CHECK(stiefel <= gaussian);
    CHECK(coord <= gaussian);
}

TEST_CASE("compute_inclusion_plan: worked examples") {
    SUBCASE("one saturated direction") {
        Vector sigma(3);
        sigma << 9, 1, 1;
        const InclusionPlan plan = compute_inclusion_plan(sigma, 2, 1.0);
        CHECK(plan.saturated == 1);
        CHECK(plan.pi(0) == doctest::Approx(1.0));
        CHECK(plan.pi(1) == doctest::Approx(0.5));
        CHECK(plan.pi(2) == doctest::Approx(0.5));
        CHECK(plan.pi.sum() == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(plan.mu_weights(1) == doctest::Approx(2.0));
    }
    SUBCASE("flat spectrum is uniform with no saturation") {
        const Vector sigma = Vector::Constant(4, 3.7);
        const InclusionPlan plan = compute_inclusion_plan(sigma, 2, 1.0);
        CHECK(plan.saturated == 0);
        for (int i = 0; i < 4; ++i) CHECK(plan.pi(i) == doctest::Approx(0.5));
    }
    SUBCASE("zero directions absorb the residual mass uniformly") {
        Vector sigma(4);
        sigma << 4, 1, 0, 0;
        const InclusionPlan plan = compute_inclusion_plan(sigma, 3, 1.0);
        CHECK(plan.saturated == 2);
        CHECK(plan.pi(0) == doctest::Approx(1.0));
        CHECK(plan.pi(1) == doctest::Approx(1.0));
        CHECK(plan.pi(2) == doctest::Approx(0.5));
        CHECK(plan.pi(3) == doctest::Approx(0.5));
        CHECK(plan.zero_sigma_indices == std::vector<int>{2, 3});
    }
    SUBCASE("all-zero spectrum is infeasible") {
        CHECK_THROWS_AS(compute_inclusion_plan(Vector::Zero(3), 2, 1.0),
                        InfeasibleSpectrumError);
    }
    SUBCASE("r equal to n saturates everything") {
        Vector sigma(3);
        sigma << 5, 2, 1;
        const InclusionPlan plan = compute_inclusion_plan(sigma, 3, 1.0);
        CHECK(plan.saturated == 3);
        CHECK((plan.pi.array() == 1.0).all());
    }
}

TEST_CASE("compute_inclusion_plan: matches the convex oracle") {
    Rng rng(51);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(63));
        const int zeros = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        const Vector sigma = test::random_spectrum(rng, n, zeros);
        if (sigma.maxCoeff() <= 0.0) continue;
        const int r = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));

        const InclusionPlan plan = compute_inclusion_plan(sigma, r, 1.0);
        const Vector oracle = test::waterfill_oracle(sigma, r);
        CHECK((plan.pi - oracle).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK(std::abs(plan.pi.sum() - r) <= 1e-10);

        // Self-consistency of the fixed point: saturated entries are exactly
        // one, unsaturated ones follow (r - t) sqrt(sigma) / tail-sum.
        const int t = plan.saturated;
        for (int i = 0; i < t; ++i) CHECK(plan.pi(i) == 1.0);
        double tail = 0.0;
        for (int i = t; i < n; ++i) tail += std::sqrt(sigma(i));
        if (tail > 0.0 && t < r) {
            for (int i = t; i < n; ++i) {
                const double expected = (r - t) * std::sqrt(sigma(i)) / tail;
                if (expected >= 1e-12) {
                    CHECK(plan.pi(i) == doctest::Approx(expected).epsilon(1e-10));
                    CHECK(plan.pi(i) < 1.0 + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("phi_min: closed-form optima") {
    Vector sigma(3);
    sigma << 9, 1, 1;
    const InclusionPlan plan = compute_inclusion_plan(sigma, 2, 1.0);
    CHECK(phi_min(plan, sigma, 1.0) == doctest::Approx(13.0).epsilon(1e-12));

    const Vector flat = Vector::Constant(4, 1.0);
    const InclusionPlan flat_plan = compute_inclusion_plan(flat, 2, 1.0);
    CHECK(phi_min(flat_plan, flat, 1.0) == doctest::Approx(8.0).epsilon(1e-12));

    Vector padded(4);
    padded << 4, 1, 0, 0;
    const InclusionPlan padded_plan = compute_inclusion_plan(padded, 3, 1.0);
    CHECK(phi_min(padded_plan, padded, 1.0) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("phi_min dominates no isotropic design and ties on flat spectra") {
    Rng rng(61);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(31));
        const int zeros = static_cast<int>(rng.below(static_cast<std::uint64_t>(n / 2 + 1)));
        const Vector sigma = test::random_spectrum(rng, n, zeros);
        const int r = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        const InclusionPlan plan = compute_inclusion_plan(sigma, r, 1.0);
        const double isotropic = static_cast<double>(n) / r * sigma.sum();
        CHECK(phi_min(plan, sigma, 1.0) <= isotropic * (1.0 + 1e-12));
    }
    const Vector flat = Vector::Constant(6, 2.0);
    const InclusionPlan plan = compute_inclusion_plan(flat, 3, 1.0);
    CHECK(phi_min(plan, flat, 1.0) ==
          doctest::Approx(6.0 / 3.0 * flat.sum()).epsilon(1e-12));
}

TEST_CASE("sample_fixed_size_pips: exact size and inclusion frequencies") {
    Vector pi(3);
    pi << 1.0, 0.5, 0.5;
    Rng rng(71);
    const int draws = 100000;
    Vector counts = Vector::Zero(3);
    for (int i = 0; i < draws; ++i) {
        const auto chosen = sample_fixed_size_pips(pi, 2, rng);
        REQUIRE(chosen.size() == 2);
        for (int idx : chosen) counts(idx) += 1.0;
    }
    CHECK(counts(0) == doctest::Approx(static_cast<double>(draws)));
    const double se = std::sqrt(0.5 * 0.5 / draws);
    CHECK(std::abs(counts(1) / draws - 0.5) <= 3.0 * se);
    CHECK(std::abs(counts(2) / draws - 0.5) <= 3.0 * se);

    CHECK_THROWS_AS(sample_fixed_size_pips(Vector::Constant(3, 0.5), 2, rng),
                    InvalidProbabilitiesError);
    Vector bad(2);
    bad << 1.5, 0.5;
    CHECK_THROWS_AS(sample_fixed_size_pips(bad, 2, rng),
                    InvalidProbabilitiesError);
}

TEST_CASE("sample_fixed_size_pips: uniform plan matches uniform subsets") {
    const int n = 6, r = 3;
    const Vector pi = Vector::Constant(n, static_cast<double>(r) / n);
    Rng rng(72);
    const int draws = 60000;
    Matrix pair_counts = Matrix::Zero(n, n);
    for (int i = 0; i < draws; ++i) {
        const auto chosen = sample_fixed_size_pips(pi, r, rng);
        for (std::size_t a = 0; a < chosen.size(); ++a)
            for (std::size_t b = a + 1; b < chosen.size(); ++b)
                pair_counts(chosen[a], chosen[b]) += 1.0;
    }
    // Uniform design pairwise inclusion: r(r-1) / (n(n-1)) = 0.2.
    const double expected = 0.2;
    const double se = std::sqrt(expected * (1 - expected) / draws);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            CHECK(std::abs(pair_counts(a, b) / draws - expected) <= 4.0 * se);
}

TEST_CASE("instance-dependent law: frame gram, isotropy, optimal second moment") {
    // Flat spectrum reduces to the structured frame scaling.
    Rng rng(81);
    const ProjectionSpec flat_spec{4, 2, 1.0};
    const SpectralWeights flat{test::random_orthonormal(rng, 4), Vector::Constant(4, 1.0)};
    const ProjectionSample flat_sample = sample_instance_dependent(flat_spec, flat, rng);
    CHECK((flat_sample.v.transpose() * flat_sample.v - 2.0 * Matrix::Identity(2, 2))
              .cwiseAbs()
              .maxCoeff() <= 1e-10);

    // sigma = (9,1,1), r = 2: E[Q^T P^2 Q] = diag(1, 2, 2).
    const ProjectionSpec spec{3, 2, 1.0};
    Vector sigma(3);
    sigma << 9, 1, 1;
    const SpectralWeights weights{test::random_orthonormal(rng, 3), sigma};
    const int draws = 100000;
    Rng rng2(82);
    Matrix second = Matrix::Zero(3, 3);
    Matrix mean = Matrix::Zero(3, 3);
    for (int i = 0; i < draws; ++i) {
        const Matrix p = sample_instance_dependent(spec, weights, rng2).projector();
        mean += p;
        second += weights.basis.transpose() * p * p * weights.basis;
    }
    mean /= draws;
    second /= draws;
    CHECK(std::abs(second(0, 0) - 1.0) <= 0.02);
    CHECK(std::abs(second(1, 1) - 2.0) <= 0.04);
    CHECK(std::abs(second(2, 2) - 2.0) <= 0.04);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            if (a != b) CHECK(std::abs(second(a, b)) <= 0.02);
    CHECK((mean - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 0.02);
}

TEST_CASE("analytic_second_moment per law") {
    const ProjectionSpec spec{8, 2, 1.0};
    CHECK((analytic_second_moment(ProjectionLaw::HaarStiefel, spec) -
           4.0 * Matrix::Identity(8, 8)).norm() <= 1e-12);
    CHECK(analytic_second_moment(ProjectionLaw::HaarStiefel, spec).trace() ==
          doctest::Approx(32.0));
    CHECK((analytic_second_moment(ProjectionLaw::Gaussian, spec) -
           5.5 * Matrix::Identity(8, 8)).norm() <= 1e-12);
    CHECK(analytic_second_moment(ProjectionLaw::Gaussian, spec).trace() ==
          doctest::Approx(44.0));

    Rng rng(91);
    Vector sigma(3);
    sigma << 9, 1, 1;
    const SpectralWeights weights{test::random_orthonormal(rng, 3), sigma};
    const ProjectionSpec dep_spec{3, 2, 1.0};
    const Matrix ep2 =
        analytic_second_moment(ProjectionLaw::InstanceDependent, dep_spec, &weights);
    Vector expected(3);
    expected << 1, 2, 2;
    const Matrix rotated = weights.basis.transpose() * ep2 * weights.basis;
    CHECK((rotated - Matrix(expected.asDiagonal())).cwiseAbs().maxCoeff() <= 1e-10);

    CHECK_THROWS_AS(analytic_second_moment(ProjectionLaw::InstanceDependent, dep_spec),
                    MissingWeightsError);
}

TEST_CASE("monte carlo second moment matches the gaussian closed form") {
    const ProjectionSpec spec{8, 2, 1.0};
    const int draws = 100000;
    Rng rng(95);
    Matrix second = Matrix::Zero(8, 8);
    for (int i = 0; i < draws; ++i) {
        const Matrix p = sample_gaussian(spec, rng).projector();
        second += p * p;
    }
    second /= draws;
    const Matrix expected = analytic_second_moment(ProjectionLaw::Gaussian, spec);
    CHECK((second - expected).cwiseAbs().maxCoeff() <= 0.15);
    CHECK(second.trace() == doctest::Approx(expected.trace()).epsilon(0.02));
}

TEST_CASE("weak unbiasedness of every law at c = 0.5 and c = 1") {
    // The dependent law gets a strictly positive spectrum: directions with
    // sigma = 0 keep only the 1e-12 probability floor, so their (huge,
    // essentially never sampled) contribution to E[P] is invisible to any
    // finite Monte Carlo run. Those directions carry no signal or noise,
    // which is why the plan may starve them in the first place.
    Rng seed_rng(97);
    const int draws = 20000;
    const double tol = 5.0 / std::sqrt(static_cast<double>(draws));
    for (const double c : {0.5, 1.0}) {
        const ProjectionSpec spec{8, 2, c};
        const SpectralWeights weights{
            test::random_orthonormal(seed_rng, 8),
            test::random_spectrum(seed_rng, 8, 0)};
        for (const ProjectionLaw law :
             {ProjectionLaw::Gaussian, ProjectionLaw::HaarStiefel,
              ProjectionLaw::CoordinateAxis, ProjectionLaw::InstanceDependent}) {
            const Matrix mean = monte_carlo_mean_projector(
                law, spec, &weights, draws, 1000 + static_cast<int>(10 * c));
            CHECK((mean - c * Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() <= tol);
        }
    }
}

TEST_CASE("starved zero-sigma directions keep the probability floor") {
    Rng rng(99);
    Vector sigma(6);
    sigma << 4, 2, 1, 0.5, 0, 0;  // unsaturated positives present
    const InclusionPlan plan = compute_inclusion_plan(sigma, 2, 1.0);
    CHECK(plan.pi(4) == doctest::Approx(1e-12));
    CHECK(plan.pi(5) == doctest::Approx(1e-12));
    CHECK(std::abs(plan.pi.sum() - 2.0) <= 1e-10);

    const ProjectionSpec spec{6, 2, 1.0};
    const SpectralWeights weights{test::random_orthonormal(rng, 6), sigma};
    for (int i = 0; i < 2000; ++i) {
        const auto sample = sample_instance_dependent(spec, weights, rng);
        for (int idx : *sample.selected_indices) CHECK(idx < 4);
    }
}

TEST_CASE("determinism: identical seeds give identical draws for every law") {
    const ProjectionSpec spec{12, 3, 0.7};
    Rng wrng(98);
    const SpectralWeights weights{test::random_orthonormal(wrng, 12),
                                  test::random_spectrum(wrng, 12, 3)};
    for (const ProjectionLaw law :
         {ProjectionLaw::Gaussian, ProjectionLaw::HaarStiefel,
          ProjectionLaw::CoordinateAxis, ProjectionLaw::InstanceDependent}) {
        Rng a(1234), b(1234);
        for (int i = 0; i < 5; ++i) {
            const ProjectionSample sa = sample_projection(spec, law, &weights, a);
            const ProjectionSample sb = sample_projection(spec, law, &weights, b);
            CHECK(sa.v == sb.v);
            CHECK(sa.selected_indices == sb.selected_indices);
        }
    }
}

TEST_CASE("law names round-trip") {
    for (const ProjectionLaw law :
         {ProjectionLaw::Gaussian, ProjectionLaw::HaarStiefel,
          ProjectionLaw::CoordinateAxis, ProjectionLaw::InstanceDependent})
        CHECK(law_from_string(to_string(law)) == law);
    CHECK(!law_from_string("fourier").has_value());
}
