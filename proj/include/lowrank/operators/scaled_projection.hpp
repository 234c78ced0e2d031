#pragma once

#include <algorithm>
#include <cmath>

#include "lowrank/core/types.hpp"

namespace lowrank {

/// P_B: shrinks row i of L by min(1, B / (sqrt(n1) ||L_i R^H||_2)) and row j
/// of R by min(1, B / (sqrt(n2) ||R_j L^H||_2)), with the cross factors taken
/// from the input pair. Rows whose cross product is zero are left alone.
///
/// The row norms are evaluated through the r x r Gram matrices, so a singular
/// Gram matrix is accepted; the closed form stays well defined.
template <typename Scalar>
FactorPair<Scalar> scaled_project(const FactorPair<Scalar>& f, double bound) {
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    throw ArgumentError("scaled_project: radius must be positive and finite");
  }
  if (!f.left.allFinite() || !f.right.allFinite()) {
    throw SingularMatrixError("scaled_project: non-finite factor entries");
  }
  const Matrix<Scalar> gram_l = f.left.adjoint() * f.left;
  const Matrix<Scalar> gram_r = f.right.adjoint() * f.right;

  auto shrink = [bound](const Matrix<Scalar>& rows, const Matrix<Scalar>& cross_gram, Index n) {
    const double root_n = std::sqrt(static_cast<double>(n));
    // ||x R^H||^2 = x (R^H R) x^H for each row x.
    const RealVector sq = (rows * cross_gram).cwiseProduct(rows.conjugate()).rowwise().sum().real();
    Matrix<Scalar> out = rows;
    for (Index i = 0; i < rows.rows(); ++i) {
      const double norm = std::sqrt(std::max(sq(i), 0.0));
      if (norm == 0.0) continue;
      const double scale = std::min(1.0, bound / (root_n * norm));
      out.row(i) *= scale;
    }
    return out;
  };

  return FactorPair<Scalar>(shrink(f.left, gram_r, f.rows()), shrink(f.right, gram_l, f.cols()));
}

}  // namespace lowrank
