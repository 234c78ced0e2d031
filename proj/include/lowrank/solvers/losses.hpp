#pragma once

#include <memory>

#include "lowrank/solvers/problem.hpp"

namespace lowrank {

/// f(X) = 1/2 ||W o (X - T)||_F^2 with positive entrywise weights W.
inline GeneralLoss<double> weighted_squared_loss(RealMatrix target, RealMatrix weights) {
  if (target.rows() != weights.rows() || target.cols() != weights.cols()) {
    throw DimensionError("weighted_squared_loss: shape mismatch");
  }
  if (!(weights.array() > 0.0).all()) throw ArgumentError("weighted_squared_loss: weights must be positive");
  auto t = std::make_shared<const RealMatrix>(std::move(target));
  auto w2 = std::make_shared<const RealMatrix>(weights.cwiseAbs2());
  GeneralLoss<double> loss;
  loss.name = "weighted_squared";
  loss.value = [t, w2](const RealMatrix& x) { return 0.5 * (x - *t).cwiseAbs2().cwiseProduct(*w2).sum(); };
  loss.gradient = [t, w2](const RealMatrix& x) -> RealMatrix { return (x - *t).cwiseProduct(*w2); };
  return loss;
}

/// f(X) = 1/2 ||X - T||_F^2 as a general loss (equivalent to factorization).
template <typename Scalar>
GeneralLoss<Scalar> squared_loss(Matrix<Scalar> target) {
  auto t = std::make_shared<const Matrix<Scalar>>(std::move(target));
  GeneralLoss<Scalar> loss;
  loss.name = "squared";
  loss.value = [t](const Matrix<Scalar>& x) { return 0.5 * (x - *t).squaredNorm(); };
  loss.gradient = [t](const Matrix<Scalar>& x) -> Matrix<Scalar> { return x - *t; };
  return loss;
}

}  // namespace lowrank
