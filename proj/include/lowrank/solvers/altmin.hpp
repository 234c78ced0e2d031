#pragma once

#include <algorithm>

#include "lowrank/solvers/problem.hpp"

namespace lowrank {

namespace detail {

// Cholesky solve of a symmetric positive definite system; the index is
// reported when the matrix is not numerically positive definite.
inline RealVector spd_solve(const RealMatrix& m, const RealVector& b, Index index) {
  Eigen::LLT<RealMatrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("altmin: singular normal equations", index);
  }
  const RealVector diag = llt.matrixL().toDenseMatrix().diagonal();
  const double lo = diag.cwiseAbs().minCoeff();
  const double hi = diag.cwiseAbs().maxCoeff();
  // cond(M) ~ (hi / lo)^2 for the Cholesky factor diagonal.
  if (!(lo > 0.0) || hi > 1e6 * lo) throw SingularMatrixError("altmin: singular normal equations", index);
  return llt.solve(b);
}

// Row-wise least squares for completion: row i of the result minimizes
// sum_{j in Omega_i} (x_i . fixed_j - observed_ij)^2. `transpose` selects the
// column problem (rows of R against the observed columns).
inline RealMatrix completion_rows(const BernoulliMask& mask, const RealMatrix& observed,
                                  const RealMatrix& fixed, bool transpose) {
  const Index count = transpose ? mask.cols() : mask.rows();
  const Index r = fixed.cols();
  RealMatrix out(count, r);
  for (Index i = 0; i < count; ++i) {
    const auto& support = transpose ? mask.col_support(i) : mask.row_support(i);
    RealMatrix gram = RealMatrix::Zero(r, r);
    RealVector rhs = RealVector::Zero(r);
    for (Index j : support) {
      const auto row = fixed.row(j);
      gram.noalias() += row.transpose() * row;
      rhs.noalias() += (transpose ? observed(j, i) : observed(i, j)) * row.transpose();
    }
    out.row(i) = spd_solve(gram, rhs, i).transpose();
  }
  return out;
}

// argmin_Z ||A(Z fixed^T) - y||^2 (or ||A(fixed Z^T) - y||^2 when `right`),
// over the column-major entries of Z, by chunked dense normal equations.
inline RealMatrix sensing_factor(const SensingOperator& op, const RealVector& y,
                                 const RealMatrix& fixed, bool right) {
  const Index rows = right ? op.cols() : op.rows();
  const Index r = fixed.cols();
  const Index unknowns = rows * r;
  const Index m = op.measurements();
  const Index chunk = 256;
  RealMatrix normal = RealMatrix::Zero(unknowns, unknowns);
  RealVector rhs = RealVector::Zero(unknowns);
  RealMatrix design(unknowns, chunk);
  for (Index k0 = 0; k0 < m; k0 += chunk) {
    const Index width = std::min(chunk, m - k0);
    for (Index c = 0; c < width; ++c) {
      const RealMatrix a = op.measurement(k0 + c);
      // <A, Z F^T> = <A F, Z>; <A, F Z^T> = <A^T F, Z>.
      const RealMatrix coeff = right ? RealMatrix(a.transpose() * fixed) : RealMatrix(a * fixed);
      design.col(c) = Eigen::Map<const RealVector>(coeff.data(), unknowns);
    }
    const auto block = design.leftCols(width);
    normal.selfadjointView<Eigen::Lower>().rankUpdate(block);
    rhs.noalias() += block * y.segment(k0, width);
  }
  normal.triangularView<Eigen::StrictlyUpper>() = normal.transpose();
  const RealVector z = spd_solve(normal, rhs, right ? 1 : 0);
  return Eigen::Map<const RealMatrix>(z.data(), rows, r);
}

}  // namespace detail

/// One alternating least-squares sweep: L from the current R, then R from the
/// new L. Supported for sensing and completion problems.
inline FactorPair<double> altmin_step(const ProblemInstance<double>& problem, const FactorPair<double>& f) {
  if (f.rows() != problem.n1 || f.cols() != problem.n2) throw DimensionError("altmin_step: shape mismatch");
  switch (problem.kind()) {
    case ProblemKind::completion: {
      const auto& c = problem.as<problems::Completion>();
      RealMatrix l = detail::completion_rows(*c.mask, c.observed, f.right, false);
      RealMatrix r = detail::completion_rows(*c.mask, c.observed, l, true);
      return FactorPair<double>(std::move(l), std::move(r));
    }
    case ProblemKind::sensing: {
      const auto& s = problem.as<problems::Sensing>();
      RealMatrix l = detail::sensing_factor(*s.op, s.y, f.right, false);
      RealMatrix r = detail::sensing_factor(*s.op, s.y, l, true);
      return FactorPair<double>(std::move(l), std::move(r));
    }
    default:
      throw ArgumentError(std::string("altmin is not defined for ") + to_string(problem.kind()) +
                          " problems");
  }
}

}  // namespace lowrank
