#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

#include "lowrank/core/types.hpp"

namespace lowrank {

// Counter-based generator: output n of stream `key` is mix(key + (n + 1) * gamma),
// i.e. the SplitMix64 sequence addressed by position. Any draw can be
// regenerated from (key, counter) alone, which is what makes sensing matrices
// and masks reproducible without storing generator state.

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream key from a parent key and a child index.
constexpr std::uint64_t split_seed(std::uint64_t key, std::uint64_t index) {
  return mix64(key ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

constexpr std::uint64_t random_at(std::uint64_t key, std::uint64_t counter) {
  return mix64(key + (counter + 1) * kGoldenGamma);
}

/// Uniform in (0, 1], 53-bit resolution.
constexpr double to_unit_open_closed(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Standard normal pair from counters (2c, 2c+1) via Box-Muller.
inline void normal_pair_at(std::uint64_t key, std::uint64_t pair_index, double& z0, double& z1) {
  const double u1 = to_unit_open_closed(random_at(key, 2 * pair_index));
  const double u2 = to_unit_open_closed(random_at(key, 2 * pair_index + 1));
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  z0 = radius * std::cos(angle);
  z1 = radius * std::sin(angle);
}

/// Fills `out` with i.i.d. N(0, scale^2) draws; entry i depends only on (key, i).
template <typename Real>
void fill_normal(std::uint64_t key, std::span<Real> out, double scale = 1.0) {
  const std::size_t n = out.size();
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) {
    double a, b;
    normal_pair_at(key, i / 2, a, b);
    out[i] = static_cast<Real>(scale * a);
    out[i + 1] = static_cast<Real>(scale * b);
  }
  if (i < n) {
    double a, b;
    normal_pair_at(key, i / 2, a, b);
    out[i] = static_cast<Real>(scale * a);
  }
}

/// Sequential view over a counter-based stream.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  std::uint64_t key() const { return key_; }
  std::uint64_t next_u64() { return random_at(key_, counter_++); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal() {
    const double u1 = to_unit_open_closed(next_u64());
    const double u2 = to_unit_open_closed(next_u64());
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, bound), bound > 0. Multiply-shift; the bias is
  /// below 2^-64 * bound, negligible at the sizes used here.
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  Rng split(std::uint64_t index) const { return Rng(split_seed(key_, index)); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

template <typename Scalar>
Matrix<Scalar> gaussian_matrix(Rng& rng, Index rows, Index cols) {
  Matrix<Scalar> m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      if constexpr (is_complex_v<Scalar>) {
        const double re = rng.normal();
        const double im = rng.normal();
        m(i, j) = Scalar(re, im);
      } else {
        m(i, j) = rng.normal();
      }
    }
  }
  return m;
}

}  // namespace lowrank
