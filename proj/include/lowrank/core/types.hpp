#pragma once

#include <cmath>
#include <complex>
#include <type_traits>

#include <Eigen/Dense>

#include "lowrank/core/errors.hpp"

namespace lowrank {

using Index = Eigen::Index;
using Complex = std::complex<double>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};
template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

/// Dense matrix over `double` or `std::complex<double>`. Every matrix-valued
/// quantity in the library (observations, factors, operators) uses this type.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<Complex>;
using RealVector = Eigen::VectorXd;

/// Real part of the Frobenius inner product, Re tr(A^H B).
template <typename Derived1, typename Derived2>
double inner(const Eigen::MatrixBase<Derived1>& a, const Eigen::MatrixBase<Derived2>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("inner product of differently shaped matrices");
  }
  return std::real(a.cwiseProduct(b.conjugate()).sum());
}

/// Largest row l2 norm, ||A||_{2,inf}.
template <typename Derived>
double two_inf_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() == 0) return 0.0;
  return std::sqrt(a.rowwise().squaredNorm().maxCoeff());
}

/// Largest entry magnitude, ||A||_inf.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a) {
  return a.allFinite();
}

/// True when A^H A is the identity to within `tol` in max-entry norm.
template <typename Derived>
bool has_orthonormal_columns(const Eigen::MatrixBase<Derived>& a, double tol) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> gram = a.adjoint() * a;
  return max_abs(gram - Matrix<Scalar>::Identity(a.cols(), a.cols())) <= tol;
}

/// Stacked factor pair F = [L; R]. The represented matrix is L R^H.
template <typename Scalar>
struct FactorPair {
  Matrix<Scalar> left;
  Matrix<Scalar> right;

  FactorPair() = default;
  FactorPair(Matrix<Scalar> l, Matrix<Scalar> r) : left(std::move(l)), right(std::move(r)) {
    if (left.cols() != right.cols() || left.cols() < 1) {
      throw DimensionError("factor pair needs matching rank >= 1");
    }
  }

  Index rank() const { return left.cols(); }
  Index rows() const { return left.rows(); }
  Index cols() const { return right.rows(); }

  Matrix<Scalar> product() const { return left * right.adjoint(); }

  /// F Q := (L Q, R Q^{-H}); the represented product is unchanged.
  FactorPair reparameterized(const Matrix<Scalar>& q) const {
    const Matrix<Scalar> q_inv = q.inverse();
    return FactorPair(left * q, right * q_inv.adjoint());
  }
};

/// Squared Frobenius norm of the stacked factor difference.
template <typename Scalar>
double stacked_distance_squared(const FactorPair<Scalar>& a, const FactorPair<Scalar>& b) {
  return (a.left - b.left).squaredNorm() + (a.right - b.right).squaredNorm();
}

/// Planted rank-r matrix X = U diag(sigma) V^H with its condition number and
/// incoherence.
template <typename Scalar>
struct GroundTruth {
  Matrix<Scalar> U;
  RealVector sigma;
  Matrix<Scalar> V;
  double kappa = 1.0;
  double mu = 1.0;

  Index rank() const { return sigma.size(); }
  Matrix<Scalar> matrix() const { return U * sigma.asDiagonal() * V.adjoint(); }

  /// Balanced factors (U Sigma^{1/2}, V Sigma^{1/2}).
  FactorPair<Scalar> factors() const {
    const RealVector root = sigma.cwiseSqrt();
    return FactorPair<Scalar>(U * root.asDiagonal(), V * root.asDiagonal());
  }
};

/// Cholesky factor of a Hermitian r x r Gram matrix with a conditioning guard.
/// Throws SingularMatrixError when the matrix is not positive definite or its
/// condition number exceeds `max_condition`.
template <typename Scalar>
Eigen::LLT<Matrix<Scalar>> checked_cholesky(const Matrix<Scalar>& gram,
                                            double max_condition = 1e12) {
  if (!gram.allFinite()) throw SingularMatrixError("Gram matrix has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(gram, Eigen::EigenvaluesOnly);
  const RealVector& ev = eig.eigenvalues();
  const double hi = ev.maxCoeff();
  const double lo = ev.minCoeff();
  if (!(lo > 0.0) || hi > max_condition * lo) {
    throw SingularMatrixError("Gram matrix is singular or ill-conditioned");
  }
  Eigen::LLT<Matrix<Scalar>> llt(gram);
  if (llt.info() != Eigen::Success) throw SingularMatrixError("Cholesky factorization failed");
  return llt;
}

}  // namespace lowrank
