#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "lowrank/core/rng.hpp"
#include "lowrank/core/types.hpp"

namespace lowrank {

/// omega_k = min(k, 2n - k, n), the length of skew diagonal k = 1..2n-1.
inline RealVector hankel_weights(Index n) {
  if (n < 1) throw DimensionError("hankel_weights: n must be positive");
  RealVector w(2 * n - 1);
  for (Index k = 1; k <= 2 * n - 1; ++k) w(k - 1) = static_cast<double>(std::min({k, 2 * n - k, n}));
  return w;
}

/// Skew-diagonal geometry of n x n matrices. Diagonal k (1-based) holds the
/// entries with i + j = k - 1 in 0-based indices.
struct HankelSpace {
  Index n = 0;
  RealVector weights;

  HankelSpace() = default;
  explicit HankelSpace(Index size) : n(size), weights(hankel_weights(size)) {}

  Index diagonals() const { return 2 * n - 1; }
};

/// Set of observed skew diagonals as a membership table over k = 1..2n-1.
class HankelSubset {
 public:
  HankelSubset(Index n, const std::vector<Index>& indices) : member_(2 * n - 1, false) {
    for (Index k : indices) {
      if (k < 1 || k > 2 * n - 1) throw DimensionError("HankelSubset: index out of range");
      member_[k - 1] = true;
    }
  }

  Index diagonals() const { return static_cast<Index>(member_.size()); }
  bool contains(Index k) const { return member_[k - 1]; }
  Index count() const { return std::count(member_.begin(), member_.end(), true); }

  std::vector<Index> indices() const {
    std::vector<Index> out;
    for (Index k = 1; k <= diagonals(); ++k)
      if (contains(k)) out.push_back(k);
    return out;
  }

 private:
  std::vector<bool> member_;
};

/// Each skew diagonal observed independently with probability p; diagonal k
/// uses draw k-1 of the stream `seed`.
inline HankelSubset sample_hankel_subset(Index n, double p, std::uint64_t seed) {
  if (!(p > 0.0 && p <= 1.0)) throw ArgumentError("sample_hankel_subset: p must lie in (0, 1]");
  std::vector<Index> picked;
  for (Index k = 1; k <= 2 * n - 1; ++k) {
    const double u = static_cast<double>(random_at(seed, k - 1) >> 11) * 0x1.0p-53;
    if (u < p) picked.push_back(k);
  }
  return HankelSubset(n, picked);
}

/// Means of the 2n-1 skew diagonals of a square matrix.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> skew_diagonal_means(const Matrix<Scalar>& x) {
  if (x.rows() != x.cols()) throw DimensionError("Hankel projection needs a square matrix");
  const Index n = x.rows();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sums = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(2 * n - 1);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) sums(i + j) += x(i, j);
  const RealVector w = hankel_weights(n);
  for (Index k = 0; k < 2 * n - 1; ++k) sums(k) /= w(k);
  return sums;
}

/// Hankel matrix whose skew diagonal k (1-based) equals values(k - 1).
template <typename Scalar>
Matrix<Scalar> hankel_from_diagonals(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& values) {
  if (values.size() < 1 || values.size() % 2 == 0) {
    throw DimensionError("hankel_from_diagonals: need 2n-1 values");
  }
  const Index n = (values.size() + 1) / 2;
  Matrix<Scalar> h(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) h(i, j) = values(i + j);
  return h;
}

/// H (or H_Omega with a subset): replaces each retained skew diagonal by its
/// mean and zeroes the others.
template <typename Scalar>
Matrix<Scalar> hankel_project(const Matrix<Scalar>& x, const std::optional<HankelSubset>& subset = std::nullopt) {
  auto means = skew_diagonal_means(x);
  if (subset) {
    if (subset->diagonals() != means.size()) throw DimensionError("hankel_project: subset size mismatch");
    for (Index k = 1; k <= means.size(); ++k)
      if (!subset->contains(k)) means(k - 1) = Scalar(0);
  }
  return hankel_from_diagonals<Scalar>(means);
}

}  // namespace lowrank
