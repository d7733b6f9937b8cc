#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include "lrg/linalg.hpp"
#include "lrg/rng.hpp"

namespace lrg::test {

inline Matrix random_psd(Rng& rng, int n, double scale = 1.0) {
    Matrix g = rng.gaussian_matrix(n, n);
    return scale * (g * g.transpose()) / n;
}

inline Matrix random_orthonormal(Rng& rng, int n) {
    return thin_qr_signfix(rng.gaussian_matrix(n, n)).q;
}

/// Independent water-filling oracle: solve
///   min sum_i sigma_i / pi_i  s.t.  0 < pi_i <= 1, sum_i pi_i = r
/// by bisecting the KKT multiplier mu in pi_i = min(1, sqrt(sigma_i / mu)).
/// Directions with sigma_i = 0 take a uniform share of whatever mass the
/// positive directions cannot absorb.
inline Vector waterfill_oracle(const Vector& sigma, int r) {
    const int n = static_cast<int>(sigma.size());
    std::vector<int> positive, zero;
    for (int i = 0; i < n; ++i)
        (sigma(i) > 0.0 ? positive : zero).push_back(i);

    Vector pi = Vector::Zero(n);
    const int s = static_cast<int>(positive.size());
    if (s <= r) {
        for (int i : positive) pi(i) = 1.0;
        if (r > s && !zero.empty()) {
            const double share =
                static_cast<double>(r - s) / static_cast<double>(zero.size());
            for (int i : zero) pi(i) = share;
        }
        return pi;
    }

    auto mass_at = [&](double mu) {
        double total = 0.0;
        for (int i : positive) total += std::min(1.0, std::sqrt(sigma(i) / mu));
        return total;
    };

    double hi = sigma.maxCoeff();
    while (mass_at(hi) > r) hi *= 2.0;
    double lo = 0.0;  // mass -> s > r as mu -> 0
    for (int iter = 0; iter < 300; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mass_at(mid) > r)
            lo = mid;
        else
            hi = mid;
    }
    for (int i : positive) pi(i) = std::min(1.0, std::sqrt(sigma(i) / hi));
    return pi;
}

/// Random descending nonnegative spectrum with a configurable number of
/// exact zeros, as used by the water-filling audits.
inline Vector random_spectrum(Rng& rng, int n, int zeros) {
    Vector sigma(n);
    for (int i = 0; i < n; ++i) {
        const double x = rng.gaussian();
        sigma(i) = i < n - zeros ? x * x + 0.05 : 0.0;
    }
    std::sort(sigma.data(), sigma.data() + n, std::greater<double>());
    return sigma;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<int>& xs,
                           const std::vector<double>& ys) {
    const std::size_t k = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double lx = std::log(static_cast<double>(xs[i]));
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = k * sxx - sx * sx;
    return (k * sxy - sx * sy) / denom;
}

/// Numerical rank through singular values with threshold tol * s_max.
inline int numerical_rank(const Matrix& a, double tol = 1e-8) {
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double cutoff = tol * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return rank;
}

}  // namespace lrg::test
