#pragma once

#include <algorithm>
#include <cstdint>

#include "lowrank/core/rng.hpp"
#include "lowrank/core/types.hpp"

namespace lowrank {

/// Leading singular triples, sigma non-increasing.
template <typename Scalar>
struct SvdResult {
  Matrix<Scalar> U;
  RealVector sigma;
  Matrix<Scalar> V;
  double residual = 0.0;  ///< max_j ||A v_j - sigma_j u_j|| / sigma_0 at exit
  int iterations = 0;

  Index rank() const { return sigma.size(); }
  Matrix<Scalar> reconstruct() const { return U * sigma.asDiagonal() * V.adjoint(); }
};

struct SvdOptions {
  double tol = 1e-12;
  int max_iters = 5000;
  int oversample = 5;
  std::uint64_t seed = 0x5EED5EED5EEDULL;
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> orthonormal_basis(const Matrix<Scalar>& y) {
  Eigen::HouseholderQR<Matrix<Scalar>> qr(y);
  return qr.householderQ() * Matrix<Scalar>::Identity(y.rows(), y.cols());
}

}  // namespace detail

/// Top-r SVD by blocked subspace iteration with Rayleigh-Ritz extraction.
///
/// The start block is a seeded Gaussian matrix with `oversample` extra
/// columns, so the result is a deterministic function of A and the options.
/// Each sweep forms B = Q^H A, extracts Ritz triples from the small SVD of B,
/// and stops once every retained triple satisfies
/// ||A v_j - sigma_j u_j|| <= tol * sigma_0.
template <typename Scalar>
SvdResult<Scalar> top_r_svd(const Matrix<Scalar>& a, Index r, const SvdOptions& opts = {}) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (r < 1 || r > std::min(m, n)) throw DimensionError("top_r_svd: rank out of range");
  if (!(opts.tol > 0.0)) throw ArgumentError("top_r_svd: tolerance must be positive");

  const Index k = std::min<Index>(r + opts.oversample, std::min(m, n));
  Rng rng(opts.seed);
  Matrix<Scalar> q = detail::orthonormal_basis<Scalar>(a * gaussian_matrix<Scalar>(rng, n, k));

  SvdResult<Scalar> out;
  double residual = 0.0;
  for (int it = 1; it <= opts.max_iters; ++it) {
    // B^H = A^H Q = Qb Rb, so B = Rb^H Qb^H and the SVD of the k x k factor Rb^H
    // gives the Ritz triples.
    const Matrix<Scalar> bh = a.adjoint() * q;
    Eigen::HouseholderQR<Matrix<Scalar>> qr(bh);
    const Matrix<Scalar> qb = qr.householderQ() * Matrix<Scalar>::Identity(n, k);
    const Matrix<Scalar> rb = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Matrix<Scalar>> small(rb.adjoint(), Eigen::ComputeFullU | Eigen::ComputeFullV);

    const Matrix<Scalar> a_qb = a * qb;
    const Matrix<Scalar> v = qb * small.matrixV().leftCols(r);
    const Matrix<Scalar> u = q * small.matrixU().leftCols(r);
    const RealVector s = small.singularValues().head(r);
    const Matrix<Scalar> av = a_qb * small.matrixV().leftCols(r);

    const double top = s(0);
    residual = 0.0;
    if (top > 0.0) {
      residual = (av - u * s.asDiagonal()).colwise().norm().maxCoeff() / top;
    }
    if (residual <= opts.tol) {
      out.U = u;
      out.sigma = s;
      out.V = v;
      out.residual = residual;
      out.iterations = it;
      return out;
    }
    q = detail::orthonormal_basis<Scalar>(a_qb);
  }
  throw ConvergenceError("top_r_svd did not converge", residual);
}

template <typename Scalar>
SvdResult<Scalar> top_r_svd(const Matrix<Scalar>& a, Index r, double tol) {
  SvdOptions opts;
  opts.tol = tol;
  return top_r_svd(a, r, opts);
}

/// Best rank-r approximation U diag(sigma) V^H.
template <typename Scalar>
Matrix<Scalar> rank_r_project(const Matrix<Scalar>& a, Index r, const SvdOptions& opts = {}) {
  return top_r_svd(a, r, opts).reconstruct();
}

/// ||A||_{F,r}: l2 norm of the top-r singular values.
template <typename Scalar>
double partial_frobenius_norm(const Matrix<Scalar>& a, Index r, const SvdOptions& opts = {}) {
  return top_r_svd(a, r, opts).sigma.norm();
}

/// Largest singular value of L R^H, computed from the r x r core of the
/// thin QR factors of L and R.
template <typename Scalar>
double top_singular_value(const FactorPair<Scalar>& f) {
  Eigen::HouseholderQR<Matrix<Scalar>> ql(f.left);
  Eigen::HouseholderQR<Matrix<Scalar>> qr(f.right);
  const Index r = f.rank();
  const Index rl = std::min(r, f.rows());
  const Index rr = std::min(r, f.cols());
  const Matrix<Scalar> tl = ql.matrixQR().topRows(rl).template triangularView<Eigen::Upper>();
  const Matrix<Scalar> tr = qr.matrixQR().topRows(rr).template triangularView<Eigen::Upper>();
  const Matrix<Scalar> core = tl * tr.adjoint();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(core);
  return svd.singularValues()(0);
}

/// Splits A ~ U diag(sigma) V^H into balanced factors (U sigma^{1/2}, V sigma^{1/2}).
template <typename Scalar>
FactorPair<Scalar> balanced_factors(const SvdResult<Scalar>& svd) {
  const RealVector root = svd.sigma.cwiseSqrt();
  return FactorPair<Scalar>(svd.U * root.asDiagonal(), svd.V * root.asDiagonal());
}

}  // namespace lowrank
