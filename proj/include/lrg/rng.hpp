#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Core>

namespace lrg {

/// Deterministic pseudo-random stream (xoshiro256** seeded through
/// SplitMix64) with counter-based child derivation.
///
/// Child streams depend only on the construction seed and the child key,
/// never on how much of the parent has been consumed. That makes replay
/// trivial: Rng(seed).child(k) is the same stream no matter when it is
/// derived. The normal generator is a branch-free Box-Muller pair, so a
/// fixed seed produces a fixed draw sequence on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = split_mix(x);
    }

    /// Derive an independent stream from (construction seed, key).
    Rng child(std::uint64_t key) const {
        std::uint64_t x = seed_ ^ (0x9e3779b97f4a7c15ULL + key);
        std::uint64_t mixed = split_mix(x);
        return Rng(mixed ^ split_mix(x));
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in (0,1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Unbiased integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % bound;
    }

    /// Standard normal draw (Box-Muller, second value cached).
    double gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        // u1 in (0,1] so the log stays finite.
        const double u1 =
            (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cached_ = radius * std::sin(angle);
        has_cached_ = true;
        return radius * std::cos(angle);
    }

    /// Matrix of i.i.d. standard normals, filled row by row.
    Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXd out(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = gaussian();
        return out;
    }

    Eigen::VectorXd gaussian_vector(Eigen::Index size) {
        Eigen::VectorXd out(size);
        for (Eigen::Index i = 0; i < size; ++i) out(i) = gaussian();
        return out;
    }

    /// Uniform random permutation of 0..n-1 (Fisher-Yates).
    std::vector<int> permutation(int n) {
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        for (int i = n - 1; i > 0; --i) {
            const auto j = static_cast<int>(below(static_cast<std::uint64_t>(i) + 1));
            std::swap(order[static_cast<std::size_t>(i)],
                      order[static_cast<std::size_t>(j)]);
        }
        return order;
    }

    /// Uniform size-k subset of 0..n-1 without replacement, ascending.
    std::vector<int> subset_without_replacement(int n, int k) {
        std::vector<int> pool(static_cast<std::size_t>(n));
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < k; ++i) {
            const auto j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[static_cast<std::size_t>(i)],
                      pool[static_cast<std::size_t>(j)]);
        }
        std::vector<int> chosen(pool.begin(), pool.begin() + k);
        std::sort(chosen.begin(), chosen.end());
        return chosen;
    }

private:
    static std::uint64_t split_mix(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_{};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace lrg
