#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lowrank/core/alignment.hpp"
#include "lowrank/core/svd.hpp"
#include "lowrank/operators/scaled_projection.hpp"
#include "lowrank/solvers/altmin.hpp"
#include "lowrank/solvers/problem.hpp"
#include "lowrank/solvers/steps.hpp"

namespace lowrank {

enum class Algorithm { scaledgd, vanilla_gd, altmin };

inline const char* to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::scaledgd: return "scaledgd";
    case Algorithm::vanilla_gd: return "vanilla_gd";
    case Algorithm::altmin: return "altmin";
  }
  return "unknown";
}

struct SolverConfig {
  Algorithm algorithm = Algorithm::scaledgd;
  double eta = 0.5;
  int max_iters = 80;
  double tol = 1e-12;
  double divergence_threshold = 1e2;
  bool track_dist = false;
  /// Completion only: apply P_B with this radius after every ScaledGD step.
  std::optional<double> projection_radius;
  /// sigma_1 used in the vanilla GD step size eta / sigma_1. When unset, the
  /// largest singular value of the initial iterate is used.
  std::optional<double> gd_sigma1;
};

enum class SolverStatus { converged, max_iters, diverged, singular };

inline const char* to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::max_iters: return "max_iters";
    case SolverStatus::diverged: return "diverged";
    case SolverStatus::singular: return "singular";
  }
  return "unknown";
}

struct TraceRow {
  int iter = 0;
  double rel_error = 0.0;
  std::optional<double> dist;
  double elapsed_s = 0.0;  ///< cumulative solver time, metrics excluded
};

template <typename Scalar>
struct IterateTrace {
  std::vector<TraceRow> rows;
  SolverStatus status = SolverStatus::max_iters;
  FactorPair<Scalar> final_factors;
  std::vector<std::string> warnings;

  /// Iteration at which rel_error first fell to `threshold`, if ever.
  std::optional<int> first_below(double threshold) const {
    for (const auto& row : rows)
      if (row.rel_error <= threshold) return row.iter;
    return std::nullopt;
  }
};

/// Runs the configured algorithm from `init`, recording the relative error
/// ||L R^H - X*||_F / ||X*||_F after every iteration (row 0 is the initial
/// iterate). Stops when rel_error <= tol (converged), rel_error exceeds the
/// divergence threshold or stops being finite (diverged), a Gram or normal
/// matrix is singular (singular; a final row with NaN error is appended), or
/// max_iters is reached. A non-finite error is recorded as +inf, so the last
/// row alone determines the status.
template <typename Scalar>
IterateTrace<Scalar> run_solver(const ProblemInstance<Scalar>& problem, const FactorPair<Scalar>& init,
                                const SolverConfig& cfg) {
  if (!(cfg.eta > 0.0)) throw ArgumentError("run_solver: eta must be positive");
  if (!(cfg.tol > 0.0)) throw ArgumentError("run_solver: tol must be positive");
  if (cfg.max_iters < 0) throw ArgumentError("run_solver: max_iters must be non-negative");
  if (!problem.truth) throw ArgumentError("run_solver: error tracking needs the ground truth");
  if (init.rows() != problem.n1 || init.cols() != problem.n2) throw DimensionError("run_solver: init shape mismatch");
  const bool rpca = problem.kind() == ProblemKind::rpca;
  if (cfg.algorithm == Algorithm::altmin && problem.kind() != ProblemKind::sensing &&
      problem.kind() != ProblemKind::completion) {
    throw ArgumentError("altmin supports sensing and completion problems only");
  }
  if (cfg.projection_radius && problem.kind() != ProblemKind::completion) {
    throw ArgumentError("scaled projection applies to completion problems only");
  }

  const GroundTruth<Scalar>& truth = *problem.truth;
  const Matrix<Scalar> x_star = truth.matrix();
  const double x_norm = x_star.norm();
  const FactorPair<Scalar> f_star = truth.factors();

  IterateTrace<Scalar> trace;
  if (rpca && (cfg.eta < 0.1 || cfg.eta > 2.0 / 3.0)) {
    trace.warnings.push_back("rpca step size outside [0.1, 2/3]");
  }
  double eta_gd = 0.0;
  if (cfg.algorithm == Algorithm::vanilla_gd) {
    const double sigma1 = cfg.gd_sigma1 ? *cfg.gd_sigma1 : top_singular_value(init);
    if (!(sigma1 > 0.0)) throw ArgumentError("run_solver: sigma_1 for the GD step must be positive");
    eta_gd = cfg.eta / sigma1;
  }

  FactorPair<Scalar> f = init;
  double elapsed = 0.0;
  auto record = [&](int iter) {
    TraceRow row;
    row.iter = iter;
    row.rel_error = (f.product() - x_star).norm() / x_norm;
    // NaN is reserved for the singular terminal row.
    if (!std::isfinite(row.rel_error)) row.rel_error = std::numeric_limits<double>::infinity();
    if (cfg.track_dist && std::isfinite(row.rel_error)) {
      try {
        row.dist = optimal_alignment(f, f_star, truth.sigma).dist;
      } catch (const SingularMatrixError&) {
        row.dist = std::numeric_limits<double>::quiet_NaN();
      }
    }
    row.elapsed_s = elapsed;
    trace.rows.push_back(row);
    return row.rel_error;
  };
  auto classify = [&](double err) -> std::optional<SolverStatus> {
    if (!std::isfinite(err) || err > cfg.divergence_threshold) return SolverStatus::diverged;
    if (err <= cfg.tol) return SolverStatus::converged;
    return std::nullopt;
  };

  if (auto s = classify(record(0))) {
    trace.status = *s;
    trace.final_factors = f;
    return trace;
  }

  using clock = std::chrono::steady_clock;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const auto start = clock::now();
    try {
      if constexpr (!is_complex_v<Scalar>) {
        if (rpca) {
          const auto& p = problem.template as<problems::Rpca>();
          if (cfg.algorithm == Algorithm::scaledgd) {
            f = rpca_iterate(f, p.observed, p.alpha, cfg.eta).factors;
          } else {
            const RealMatrix x = f.product();
            const RealMatrix s = truncate_top_fraction(RealMatrix(p.observed - x), std::min(1.0, 2.0 * p.alpha));
            const RealMatrix g = x + s - p.observed;
            f = vanilla_gd_step<double>(f, g * f.right, g.transpose() * f.left, eta_gd);
          }
        } else if (cfg.algorithm == Algorithm::altmin) {
          f = altmin_step(problem, f);
        }
      }
      if (!rpca && cfg.algorithm != Algorithm::altmin) {
        const auto [gl, gr] = problem_gradients(problem, f);
        if (cfg.algorithm == Algorithm::scaledgd) {
          f = scaled_step(f, gl, gr, cfg.eta);
          if constexpr (!is_complex_v<Scalar>) {
            if (cfg.projection_radius) f = scaled_project(f, *cfg.projection_radius);
          }
        } else {
          f = vanilla_gd_step(f, gl, gr, eta_gd);
        }
      }
    } catch (const SingularMatrixError&) {
      elapsed += std::chrono::duration<double>(clock::now() - start).count();
      TraceRow row;
      row.iter = it;
      row.rel_error = std::numeric_limits<double>::quiet_NaN();
      row.elapsed_s = elapsed;
      trace.rows.push_back(row);
      trace.status = SolverStatus::singular;
      trace.final_factors = f;
      return trace;
    }
    elapsed += std::chrono::duration<double>(clock::now() - start).count();
    if (auto s = classify(record(it))) {
      trace.status = *s;
      trace.final_factors = f;
      return trace;
    }
  }
  trace.status = SolverStatus::max_iters;
  trace.final_factors = f;
  return trace;
}

}  // namespace lowrank
