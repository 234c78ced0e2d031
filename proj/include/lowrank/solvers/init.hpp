#pragma once

#include <cmath>
#include <optional>

#include "lowrank/core/alignment.hpp"
#include "lowrank/core/svd.hpp"
#include "lowrank/operators/scaled_projection.hpp"
#include "lowrank/operators/truncation.hpp"
#include "lowrank/solvers/problem.hpp"

namespace lowrank {

enum class ProjectionMode { off, alg3 };

struct InitOptions {
  /// Completion only: alg3 applies P_B with B = projection_constant *
  /// sqrt(mu_hat r) sigma_0, mu_hat the incoherence of the top-r singular
  /// vectors of the surrogate.
  ProjectionMode projection = ProjectionMode::off;
  double projection_constant = 1.02;
  /// Overrides the radius computed in alg3 mode.
  std::optional<double> projection_radius;
  SvdOptions svd{1e-10, 20000, 5, 0x5EED5EED5EEDULL};
};

template <typename Scalar>
struct InitResult {
  FactorPair<Scalar> factors;
  RealVector sigma;                 ///< top-r singular values of the surrogate
  std::optional<double> radius;     ///< projection radius, when P_B was applied
};

/// Problem-specific matrix whose top-r SVD seeds the solvers.
template <typename Scalar>
Matrix<Scalar> spectral_surrogate(const ProblemInstance<Scalar>& problem) {
  detail::check_field<Scalar>(problem.kind());
  switch (problem.kind()) {
    case ProblemKind::factorization:
      return problem.template as<problems::Factorization<Scalar>>().target;
    case ProblemKind::general:
      return problem.template as<problems::General<Scalar>>().observation;
    default:
      break;
  }
  if constexpr (is_complex_v<Scalar>) {
    const auto& h = problem.template as<problems::Hankel>();
    return h.observed / h.p;
  } else {
    switch (problem.kind()) {
      case ProblemKind::sensing: {
        const auto& s = problem.template as<problems::Sensing>();
        return s.op->adjoint(s.y);
      }
      case ProblemKind::rpca: {
        const auto& p = problem.template as<problems::Rpca>();
        return p.observed - truncate_top_fraction(p.observed, p.alpha);
      }
      case ProblemKind::completion: {
        const auto& c = problem.template as<problems::Completion>();
        return c.observed / c.p;
      }
      default:
        throw ArgumentError("hankel problems are defined over the complex field");
    }
  }
}

/// Balanced factors of the top-r SVD of the spectral surrogate, followed by
/// P_B for completion in alg3 mode.
template <typename Scalar>
InitResult<Scalar> spectral_init(const ProblemInstance<Scalar>& problem, Index r,
                                 const InitOptions& opts = {}) {
  const auto svd = top_r_svd(spectral_surrogate(problem), r, opts.svd);
  InitResult<Scalar> out{balanced_factors(svd), svd.sigma, std::nullopt};
  const bool project = opts.projection == ProjectionMode::alg3 || opts.projection_radius.has_value();
  if (project) {
    if (problem.kind() != ProblemKind::completion) {
      throw ArgumentError("scaled projection applies to completion problems only");
    }
    double radius = 0.0;
    if (opts.projection_radius) {
      radius = *opts.projection_radius;
    } else {
      const double mu_hat = incoherence_of(svd.U, svd.V);
      radius = opts.projection_constant * std::sqrt(mu_hat * static_cast<double>(r)) * svd.sigma(0);
    }
    out.factors = scaled_project(out.factors, radius);
    out.radius = radius;
  }
  return out;
}

/// T0 steps of projected gradient descent on the sensing loss from X = 0:
/// X <- P_r(X - A^*(A(X) - y)).
inline RealMatrix pgd_warm_start(const SensingOperator& op, const RealVector& y, Index r, int t0,
                                 const SvdOptions& svd = {1e-10, 20000, 5, 0x5EED5EED5EEDULL}) {
  if (t0 < 0) throw ArgumentError("pgd_warm_start: negative step count");
  RealMatrix x = RealMatrix::Zero(op.rows(), op.cols());
  for (int t = 0; t < t0; ++t) x = rank_r_project(RealMatrix(x - op.residual_adjoint(x, y)), r, svd);
  return x;
}

}  // namespace lowrank
