#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "lowrank/core/types.hpp"

namespace lowrank {

/// Result of minimizing the scaled alignment objective over invertible Q.
template <typename Scalar>
struct AlignmentResult {
  Matrix<Scalar> Q;
  double dist = 0.0;                ///< sqrt of the objective at Q
  double criterion_residual = 0.0;  ///< stationarity residual at Q
  double tolerance = 0.0;           ///< residual threshold used for `converged`
  bool converged = false;
  int iterations = 0;
};

/// Orthogonal (unitary) Procrustes alignment: O = A B^H where A S B^H is the
/// SVD of F^H Fstar, i.e. the orthonormal O minimizing ||F O - Fstar||_F.
template <typename Scalar>
Matrix<Scalar> orthogonal_align(const FactorPair<Scalar>& f, const FactorPair<Scalar>& fstar) {
  if (f.rows() != fstar.rows() || f.cols() != fstar.cols() || f.rank() != fstar.rank()) {
    throw DimensionError("orthogonal_align: factor shapes differ");
  }
  const Matrix<Scalar> cross = f.left.adjoint() * fstar.left + f.right.adjoint() * fstar.right;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  const double floor = std::max(s(0), 1.0) * 1e-13;
  if (!(s(s.size() - 1) > floor)) {
    throw SingularMatrixError("orthogonal_align: F^H Fstar is rank deficient");
  }
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// Value of ||(L Q - L*) S||_F^2 + ||(R Q^{-H} - R*) S||_F^2 with S = diag(sigma)^{1/2}.
template <typename Scalar>
double scaled_objective(const FactorPair<Scalar>& f, const FactorPair<Scalar>& fstar,
                        const RealVector& sigma, const Matrix<Scalar>& q) {
  const RealVector root = sigma.cwiseSqrt();
  const Matrix<Scalar> p = q.inverse().adjoint();
  return ((f.left * q - fstar.left) * root.asDiagonal()).squaredNorm() +
         ((f.right * p - fstar.right) * root.asDiagonal()).squaredNorm();
}

struct AlignmentOptions {
  double tol = 1e-10;
  int max_iters = 200;
  double max_condition = 1e12;
};

namespace detail {

// Real coordinates of an r x r matrix: column-major entries, followed by the
// imaginary parts in the complex case.
template <typename Scalar>
RealVector pack(const Matrix<Scalar>& q) {
  const Index n = q.size();
  if constexpr (is_complex_v<Scalar>) {
    RealVector x(2 * n);
    for (Index i = 0; i < n; ++i) {
      x(i) = q.data()[i].real();
      x(n + i) = q.data()[i].imag();
    }
    return x;
  } else {
    return Eigen::Map<const RealVector>(q.data(), n);
  }
}

template <typename Scalar>
Matrix<Scalar> unpack(const RealVector& x, Index r) {
  Matrix<Scalar> q(r, r);
  const Index n = r * r;
  for (Index i = 0; i < n; ++i) {
    if constexpr (is_complex_v<Scalar>) {
      q.data()[i] = Scalar(x(i), x(n + i));
    } else {
      q.data()[i] = x(i);
    }
  }
  return q;
}

// Objective, gradient, and stationarity residual at one Q.
template <typename Scalar>
struct AlignmentEval {
  bool feasible = false;
  double value = std::numeric_limits<double>::infinity();
  Matrix<Scalar> gradient;
  Matrix<Scalar> inverse_adjoint;  // Q^{-H}
  double residual = 0.0;
};

template <typename Scalar>
AlignmentEval<Scalar> evaluate_alignment(const FactorPair<Scalar>& f,
                                         const FactorPair<Scalar>& fstar, const RealVector& sigma,
                                         const Matrix<Scalar>& q, double max_condition) {
  AlignmentEval<Scalar> ev;
  if (!q.allFinite()) return ev;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(q);
  const RealVector& s = svd.singularValues();
  if (!(s(s.size() - 1) > 0.0) || s(0) > max_condition * s(s.size() - 1)) return ev;

  const Matrix<Scalar> p = q.inverse().adjoint();
  const Matrix<Scalar> lq = f.left * q;
  const Matrix<Scalar> rp = f.right * p;
  const Matrix<Scalar> el = lq - fstar.left;
  const Matrix<Scalar> er = rp - fstar.right;
  const auto weights = sigma.asDiagonal();
  const RealVector root = sigma.cwiseSqrt();

  ev.feasible = true;
  ev.value = (el * root.asDiagonal()).squaredNorm() + (er * root.asDiagonal()).squaredNorm();
  // d/dQ of the objective, as the matrix G with df = Re<G, dQ>.
  const Matrix<Scalar> term_l = f.left.adjoint() * el * weights;
  const Matrix<Scalar> term_r = p * weights * er.adjoint() * rp;
  ev.gradient = 2.0 * (term_l - term_r);
  // (LQ)^H (LQ - L*) Sigma - Sigma (RQ^{-H} - R*)^H R Q^{-H}
  const Matrix<Scalar> crit = lq.adjoint() * el * weights - weights * er.adjoint() * rp;
  ev.residual = crit.norm();
  ev.inverse_adjoint = p;
  return ev;
}

// Gauss-Newton curvature of the objective at Q in real coordinates:
// 2 [ (Sigma^T kron L^H L) + (B^T kron A) ] with A = P Sigma P^H, B = P^H R^H R P.
template <typename Scalar>
RealMatrix gauss_newton_hessian(const FactorPair<Scalar>& f, const RealVector& sigma,
                                const Matrix<Scalar>& p) {
  const Index r = sigma.size();
  const Matrix<Scalar> gram_l = f.left.adjoint() * f.left;
  const Matrix<Scalar> gram_r = f.right.adjoint() * f.right;
  const Matrix<Scalar> a = p * sigma.asDiagonal() * p.adjoint();
  const Matrix<Scalar> b = p.adjoint() * gram_r * p;
  const Index n = r * r;
  Matrix<Scalar> m = Matrix<Scalar>::Zero(n, n);
  for (Index j2 = 0; j2 < r; ++j2) {
    for (Index j1 = 0; j1 < r; ++j1) {
      // Block (j1, j2) of X kron Y is X(j1, j2) * Y.
      Matrix<Scalar> block = b(j2, j1) * a;  // (B^T)(j1, j2) = B(j2, j1)
      if (j1 == j2) block += sigma(j1) * gram_l;
      m.block(j1 * r, j2 * r, r, r) = block;
    }
  }
  if constexpr (is_complex_v<Scalar>) {
    RealMatrix h(2 * n, 2 * n);
    h.topLeftCorner(n, n) = m.real();
    h.topRightCorner(n, n) = -m.imag();
    h.bottomLeftCorner(n, n) = m.imag();
    h.bottomRightCorner(n, n) = m.real();
    return 2.0 * h;
  } else {
    return 2.0 * m;
  }
}

}  // namespace detail

/// Optimal alignment matrix and scaled distance between F and Fstar.
///
/// Minimizes ||(L Q - L*) Sigma^{1/2}||_F^2 + ||(R Q^{-H} - R*) Sigma^{1/2}||_F^2
/// over invertible Q by BFGS started at the Procrustes alignment, with the
/// inverse Hessian seeded from the Gauss-Newton curvature at the start point.
/// `converged` means the stationarity residual
/// ||(LQ)^H (LQ - L*) Sigma - Sigma (RQ^{-H} - R*)^H R Q^{-H}||_F fell below
/// `tolerance` = tol * sigma_1 * dist + 64 eps * sigma_1^2. When not converged the
/// returned dist is still a valid upper bound on the true distance.
template <typename Scalar>
AlignmentResult<Scalar> optimal_alignment(const FactorPair<Scalar>& f,
                                          const FactorPair<Scalar>& fstar,
                                          const RealVector& sigma,
                                          const AlignmentOptions& opts = {}) {
  const Index r = f.rank();
  if (sigma.size() != r || fstar.rank() != r || f.rows() != fstar.rows() ||
      f.cols() != fstar.cols()) {
    throw DimensionError("optimal_alignment: shapes differ");
  }
  if (!(opts.tol > 0.0)) throw ArgumentError("optimal_alignment: tolerance must be positive");

  const double sigma1 = sigma.maxCoeff();
  const double eps = std::numeric_limits<double>::epsilon();
  auto threshold = [&](double value) {
    return opts.tol * sigma1 * std::sqrt(std::max(value, 0.0)) + 64.0 * eps * sigma1 * sigma1;
  };

  Matrix<Scalar> q = orthogonal_align(f, fstar);
  auto ev = detail::evaluate_alignment(f, fstar, sigma, q, opts.max_condition);
  if (!ev.feasible) throw SingularMatrixError("optimal_alignment: singular starting point");

  AlignmentResult<Scalar> out;
  auto finish = [&](int iterations) {
    out.Q = q;
    out.dist = std::sqrt(ev.value);
    out.criterion_residual = ev.residual;
    out.tolerance = threshold(ev.value);
    out.converged = ev.residual <= out.tolerance;
    out.iterations = iterations;
    return out;
  };
  if (ev.residual <= threshold(ev.value)) return finish(0);

  RealMatrix h0 = detail::gauss_newton_hessian(f, sigma, ev.inverse_adjoint);
  // The Gauss-Newton matrix is PSD; a tiny ridge keeps the seed invertible.
  const double ridge = 1e-14 * std::max(h0.diagonal().maxCoeff(), 1e-300);
  h0.diagonal().array() += ridge;
  RealMatrix hinv = h0.ldlt().solve(RealMatrix::Identity(h0.rows(), h0.cols()));

  RealVector x = detail::pack(q);
  RealVector g = detail::pack(ev.gradient);
  for (int it = 1; it <= opts.max_iters; ++it) {
    RealVector dir = -hinv * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      dir = -g;
      slope = -g.squaredNorm();
      hinv.setIdentity();
    }
    double step = 1.0;
    bool accepted = false;
    bool any_feasible = false;
    detail::AlignmentEval<Scalar> trial;
    RealVector x_new;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * dir;
      trial = detail::evaluate_alignment(f, fstar, sigma, detail::unpack<Scalar>(x_new, r),
                                         opts.max_condition);
      if (trial.feasible) {
        any_feasible = true;
        if (trial.value <= ev.value + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!any_feasible) throw SingularMatrixError("optimal_alignment: Q became singular");
      return finish(it - 1);  // no further decrease available at this precision
    }
    const RealVector g_new = detail::pack(trial.gradient);
    const RealVector s = x_new - x;
    const RealVector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      const RealVector hy = hinv * y;
      const double yhy = y.dot(hy);
      hinv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
              (hy * s.transpose() + s * hy.transpose()) / sy;
    }
    x = x_new;
    g = g_new;
    ev = std::move(trial);
    q = detail::unpack<Scalar>(x, r);
    if (ev.residual <= threshold(ev.value)) return finish(it);
  }
  return finish(opts.max_iters);
}

template <typename Scalar>
AlignmentResult<Scalar> optimal_alignment(const FactorPair<Scalar>& f,
                                          const FactorPair<Scalar>& fstar,
                                          const RealVector& sigma, double tol) {
  AlignmentOptions opts;
  opts.tol = tol;
  return optimal_alignment(f, fstar, sigma, opts);
}

/// Scaled distance dist(F, F*) (an upper bound if the alignment did not converge).
template <typename Scalar>
double scaled_distance(const FactorPair<Scalar>& f, const GroundTruth<Scalar>& truth) {
  return optimal_alignment(f, truth.factors(), truth.sigma).dist;
}

/// mu = max(n1 ||U||_{2,inf}^2 / r, n2 ||V||_{2,inf}^2 / r).
template <typename Scalar>
double incoherence_of(const Matrix<Scalar>& u, const Matrix<Scalar>& v) {
  if (u.cols() != v.cols() || u.cols() < 1) throw DimensionError("incoherence_of: rank mismatch");
  if (!has_orthonormal_columns(u, 1e-8) || !has_orthonormal_columns(v, 1e-8)) {
    throw DimensionError("incoherence_of: columns are not orthonormal");
  }
  const double r = static_cast<double>(u.cols());
  const double mu_u = static_cast<double>(u.rows()) * std::pow(two_inf_norm(u), 2) / r;
  const double mu_v = static_cast<double>(v.rows()) * std::pow(two_inf_norm(v), 2) / r;
  return std::max(mu_u, mu_v);
}

}  // namespace lowrank
