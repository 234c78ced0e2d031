#pragma once

#include <utility>

#include "lowrank/core/types.hpp"
#include "lowrank/operators/truncation.hpp"

namespace lowrank {

namespace detail {

// X G^{-1} for a Hermitian positive definite r x r matrix G, via Cholesky.
template <typename Scalar>
Matrix<Scalar> right_solve(const Matrix<Scalar>& x, const Matrix<Scalar>& gram) {
  const auto llt = checked_cholesky(gram);
  return llt.solve(x.adjoint()).adjoint();
}

}  // namespace detail

/// L' = L - eta G_L (R^H R)^{-1}, R' = R - eta G_R (L^H L)^{-1}, both from the
/// pre-step factors. Throws SingularMatrixError on a singular Gram matrix.
template <typename Scalar>
FactorPair<Scalar> scaled_step(const FactorPair<Scalar>& f, const Matrix<Scalar>& grad_l,
                               const Matrix<Scalar>& grad_r, double eta) {
  if (grad_l.rows() != f.left.rows() || grad_l.cols() != f.rank() ||
      grad_r.rows() != f.right.rows() || grad_r.cols() != f.rank()) {
    throw DimensionError("scaled_step: gradient shape mismatch");
  }
  const Matrix<Scalar> gram_l = f.left.adjoint() * f.left;
  const Matrix<Scalar> gram_r = f.right.adjoint() * f.right;
  return FactorPair<Scalar>(f.left - eta * detail::right_solve(grad_l, gram_r),
                            f.right - eta * detail::right_solve(grad_r, gram_l));
}

/// Plain gradient step with step size eta_gd (typically eta / sigma_1).
template <typename Scalar>
FactorPair<Scalar> vanilla_gd_step(const FactorPair<Scalar>& f, const Matrix<Scalar>& grad_l,
                                   const Matrix<Scalar>& grad_r, double eta_gd) {
  if (grad_l.rows() != f.left.rows() || grad_l.cols() != f.rank() ||
      grad_r.rows() != f.right.rows() || grad_r.cols() != f.rank()) {
    throw DimensionError("vanilla_gd_step: gradient shape mismatch");
  }
  return FactorPair<Scalar>(f.left - eta_gd * grad_l, f.right - eta_gd * grad_r);
}

/// Symmetric factorization X = L L^H: L' = L - eta (L L^H - X*) L (L^H L)^{-1}.
template <typename Scalar>
Matrix<Scalar> scaledgd_psd_step(const Matrix<Scalar>& l, const Matrix<Scalar>& x_star, double eta) {
  if (x_star.rows() != l.rows() || x_star.cols() != l.rows()) {
    throw DimensionError("scaledgd_psd_step: shape mismatch");
  }
  const Matrix<Scalar> grad = (l * l.adjoint() - x_star) * l;
  return l - eta * detail::right_solve(grad, Matrix<Scalar>(l.adjoint() * l));
}

struct RpcaIterate {
  FactorPair<double> factors;
  RealMatrix sparse;
};

/// Sparse estimate S = T_{2 alpha}[Y - L R^T] followed by a scaled step on
/// 1/2 ||L R^T + S - Y||_F^2.
inline RpcaIterate rpca_iterate(const FactorPair<double>& f, const RealMatrix& y, double alpha, double eta) {
  if (y.rows() != f.rows() || y.cols() != f.cols()) throw DimensionError("rpca_iterate: shape mismatch");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ArgumentError("rpca_iterate: alpha must lie in [0, 1)");
  const RealMatrix x = f.product();
  RealMatrix s = truncate_top_fraction(RealMatrix(y - x), std::min(1.0, 2.0 * alpha));
  const RealMatrix g = x + s - y;
  return {scaled_step<double>(f, g * f.right, g.transpose() * f.left, eta), std::move(s)};
}

}  // namespace lowrank
