#pragma once

#include <cstdint>
#include <vector>

#include "lowrank/core/rng.hpp"
#include "lowrank/core/types.hpp"

namespace lowrank {

/// Observation set Omega with each cell included independently with
/// probability p. Cell (i, j) uses draw i*n2 + j of the stream `seed`.
class BernoulliMask {
 public:
  BernoulliMask(Index n1, Index n2, double p, std::uint64_t seed) : p_(p), seed_(seed) {
    if (n1 < 1 || n2 < 1) throw DimensionError("BernoulliMask: empty dimensions");
    if (!(p > 0.0 && p <= 1.0)) throw ArgumentError("BernoulliMask: p must lie in (0, 1]");
    indicator_.resize(n1, n2);
    for (Index i = 0; i < n1; ++i) {
      for (Index j = 0; j < n2; ++j) {
        const std::uint64_t bits = random_at(seed, static_cast<std::uint64_t>(i * n2 + j));
        const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
        indicator_(i, j) = u < p ? 1.0 : 0.0;
      }
    }
    index_rows();
  }

  /// Mask from an explicit 0/1 pattern; p is the nominal sampling rate.
  BernoulliMask(const RealMatrix& pattern, double p) : p_(p), seed_(0) {
    if (!(p > 0.0 && p <= 1.0)) throw ArgumentError("BernoulliMask: p must lie in (0, 1]");
    indicator_ = (pattern.array() != 0.0).cast<double>();
    index_rows();
  }

  Index rows() const { return indicator_.rows(); }
  Index cols() const { return indicator_.cols(); }
  double p() const { return p_; }
  std::uint64_t seed() const { return seed_; }
  bool included(Index i, Index j) const { return indicator_(i, j) != 0.0; }
  Index count() const { return static_cast<Index>(indicator_.sum()); }

  /// 0/1 matrix of included cells.
  const RealMatrix& indicator() const { return indicator_; }

  /// Observed column indices of row i, ascending.
  const std::vector<Index>& row_support(Index i) const { return row_support_[i]; }
  /// Observed row indices of column j, ascending.
  const std::vector<Index>& col_support(Index j) const { return col_support_[j]; }

 private:
  void index_rows() {
    row_support_.assign(rows(), {});
    col_support_.assign(cols(), {});
    for (Index j = 0; j < cols(); ++j) {
      for (Index i = 0; i < rows(); ++i) {
        if (indicator_(i, j) != 0.0) {
          row_support_[i].push_back(j);
          col_support_[j].push_back(i);
        }
      }
    }
  }

  double p_;
  std::uint64_t seed_;
  RealMatrix indicator_;
  std::vector<std::vector<Index>> row_support_;
  std::vector<std::vector<Index>> col_support_;
};

/// P_Omega(X): keeps included entries, zeroes the rest.
template <typename Scalar>
Matrix<Scalar> mask_project(const BernoulliMask& mask, const Matrix<Scalar>& x) {
  if (x.rows() != mask.rows() || x.cols() != mask.cols()) {
    throw DimensionError("mask_project: shape mismatch");
  }
  return x.cwiseProduct(mask.indicator().template cast<Scalar>());
}

}  // namespace lowrank
