#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lowrank/core/types.hpp"

namespace lowrank {

/// Number of entries kept per line of length n at fraction alpha_bar:
/// ceil(alpha_bar * n), with a small guard so that products such as 0.1 * 100
/// that land a rounding error above an integer are not bumped up.
inline Index keep_count(double alpha_bar, Index n) {
  const double raw = alpha_bar * static_cast<double>(n);
  return std::min<Index>(n, static_cast<Index>(std::ceil(raw - 1e-9)));
}

namespace detail {

// k-th largest value of `values` (1-based k, 1 <= k <= size). Reorders `values`.
inline double kth_largest(std::vector<double>& values, Index k) {
  auto nth = values.begin() + (k - 1);
  std::nth_element(values.begin(), nth, values.end(), std::greater<double>());
  return *nth;
}

}  // namespace detail

/// T_alpha_bar: keeps entry (i, j) when its magnitude is at least the
/// ceil(alpha_bar*n2)-th largest magnitude of row i and at least the
/// ceil(alpha_bar*n1)-th largest magnitude of column j. Ties at a threshold are
/// all kept. alpha_bar = 0 keeps nothing.
inline RealMatrix truncate_top_fraction(const RealMatrix& a, double alpha_bar) {
  if (!(alpha_bar >= 0.0 && alpha_bar <= 1.0)) {
    throw ArgumentError("truncate_top_fraction: alpha_bar must lie in [0, 1]");
  }
  const Index n1 = a.rows();
  const Index n2 = a.cols();
  const Index k_row = keep_count(alpha_bar, n2);
  const Index k_col = keep_count(alpha_bar, n1);
  RealMatrix out = RealMatrix::Zero(n1, n2);
  if (k_row == 0 || k_col == 0 || a.size() == 0) return out;

  const RealMatrix mag = a.cwiseAbs();
  RealVector row_threshold(n1);
  RealVector col_threshold(n2);
  std::vector<double> buffer;
  for (Index i = 0; i < n1; ++i) {
    buffer.assign(n2, 0.0);
    for (Index j = 0; j < n2; ++j) buffer[j] = mag(i, j);
    row_threshold(i) = detail::kth_largest(buffer, k_row);
  }
  for (Index j = 0; j < n2; ++j) {
    buffer.assign(mag.col(j).data(), mag.col(j).data() + n1);
    col_threshold(j) = detail::kth_largest(buffer, k_col);
  }
  for (Index j = 0; j < n2; ++j) {
    for (Index i = 0; i < n1; ++i) {
      if (mag(i, j) >= row_threshold(i) && mag(i, j) >= col_threshold(j)) out(i, j) = a(i, j);
    }
  }
  return out;
}

}  // namespace lowrank
