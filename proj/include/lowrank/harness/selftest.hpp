#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lowrank/core/alignment.hpp"
#include "lowrank/core/rng.hpp"
#include "lowrank/core/svd.hpp"
#include "lowrank/harness/config.hpp"
#include "lowrank/harness/csv.hpp"
#include "lowrank/harness/grid.hpp"
#include "lowrank/operators/scaled_projection.hpp"
#include "lowrank/operators/sensing.hpp"
#include "lowrank/operators/truncation.hpp"
#include "lowrank/solvers/steps.hpp"

namespace lowrank {

namespace selftest_detail {

struct Check {
  const char* name;
  std::function<std::string()> run;  // empty string on success
};

inline std::string fail(const std::string& what, double got, double limit) {
  std::ostringstream msg;
  msg << what << ": " << got << " > " << limit;
  return msg.str();
}

inline RealMatrix random_orthonormal(Rng& rng, Index n, Index r) {
  Eigen::HouseholderQR<RealMatrix> qr(gaussian_matrix<double>(rng, n, r));
  return qr.householderQ() * RealMatrix::Identity(n, r);
}

inline double max_abs(const RealMatrix& a) { return a.cwiseAbs().maxCoeff(); }

// One scaled step against the explicit block-diagonal preconditioner
// ((R^T R) kron I)^{-1} and ((L^T L) kron I)^{-1} applied to vec(G).
inline std::string quasi_newton() {
  Rng rng(11);
  const Index n1 = 4, n2 = 3, r = 2;
  const RealMatrix target = gaussian_matrix<double>(rng, n1, n2);
  const FactorPair<double> f(gaussian_matrix<double>(rng, n1, r), gaussian_matrix<double>(rng, n2, r));
  const RealMatrix g = f.product() - target;
  const RealMatrix gl = g * f.right, gr = g.transpose() * f.left;
  const auto step = scaled_step(f, gl, gr, 0.5);
  auto kron_identity = [](const RealMatrix& a, Index n) {
    RealMatrix out = RealMatrix::Zero(a.rows() * n, a.cols() * n);
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < a.cols(); ++j) out.block(i * n, j * n, n, n) = a(i, j) * RealMatrix::Identity(n, n);
    return out;
  };
  const RealMatrix hl = kron_identity(f.right.transpose() * f.right, n1);
  const RealMatrix hr = kron_identity(f.left.transpose() * f.left, n2);
  const RealVector vl = Eigen::Map<const RealVector>(f.left.data(), n1 * r) -
                        0.5 * hl.inverse() * Eigen::Map<const RealVector>(gl.data(), n1 * r);
  const RealVector vr = Eigen::Map<const RealVector>(f.right.data(), n2 * r) -
                        0.5 * hr.inverse() * Eigen::Map<const RealVector>(gr.data(), n2 * r);
  const double err = (Eigen::Map<const RealVector>(step.left.data(), n1 * r) - vl).norm() +
                     (Eigen::Map<const RealVector>(step.right.data(), n2 * r) - vr).norm();
  return err <= 1e-10 ? "" : fail("step mismatch", err, 1e-10);
}

inline std::string covariance() {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n1 = 8, n2 = 6, r = 2;
    const RealMatrix target = gaussian_matrix<double>(rng, n1, r) * gaussian_matrix<double>(rng, r, n2);
    const FactorPair<double> f(gaussian_matrix<double>(rng, n1, r), gaussian_matrix<double>(rng, n2, r));
    // Q = U diag(s) V^T with singular values in [1, 10].
    RealVector s(r);
    s << 1.0, 1.0 + 9.0 * rng.uniform();
    const RealMatrix q = random_orthonormal(rng, r, r) * s.asDiagonal() * random_orthonormal(rng, r, r).transpose();
    const RealMatrix qit = q.inverse().transpose();
    auto step = [&](const FactorPair<double>& x) {
      const RealMatrix g = x.product() - target;
      return scaled_step<double>(x, g * x.right, g.transpose() * x.left, 0.5);
    };
    const auto a = step(FactorPair<double>(f.left * q, f.right * qit));
    const auto b = step(f);
    const double err = (a.left - b.left * q).norm() / (b.left * q).norm() +
                       (a.right - b.right * qit).norm() / (b.right * qit).norm();
    if (!(err <= 1e-9)) return fail("reparameterized step differs", err, 1e-9);
  }
  return "";
}

inline std::string truncation_bound() {
  Rng rng(13);
  const Index n = 40, r = 2;
  for (int trial = 0; trial < 50; ++trial) {
    const double alpha = 0.05;
    const RealMatrix xs = gaussian_matrix<double>(rng, n, r) * gaussian_matrix<double>(rng, r, n) / n;
    const RealMatrix ss = truncate_top_fraction(gaussian_matrix<double>(rng, n, n), alpha);
    const RealMatrix lr = xs + 0.01 * gaussian_matrix<double>(rng, n, r) * gaussian_matrix<double>(rng, r, n) / n;
    const RealMatrix s = truncate_top_fraction(RealMatrix(xs + ss - lr), 2 * alpha);
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() * (max_abs(xs + ss) + max_abs(lr));
    const double bound = 2.0 * max_abs(lr - xs) + slack;
    if (!(max_abs(s - ss) <= bound)) return fail("sup-norm bound", max_abs(s - ss), bound);
  }
  return "";
}

inline std::string projection_nonexpansive() {
  Rng rng(14);
  const Index n1 = 30, n2 = 25, r = 3;
  RealVector sigma(r);
  sigma << 1.0, 0.6, 0.2;
  const RealVector root = sigma.cwiseSqrt();
  for (int trial = 0; trial < 30; ++trial) {
    const RealMatrix u = random_orthonormal(rng, n1, r), v = random_orthonormal(rng, n2, r);
    const FactorPair<double> fs(u * root.asDiagonal(), v * root.asDiagonal());
    const double b = 1.02 * std::sqrt(incoherence_of(u, v) * r) * sigma(0);
    const FactorPair<double> ft(fs.left + 0.005 * gaussian_matrix<double>(rng, n1, r),
                                fs.right + 0.005 * gaussian_matrix<double>(rng, n2, r));
    const double before = optimal_alignment(ft, fs, sigma).dist;
    const double after = optimal_alignment(scaled_project(ft, b), fs, sigma).dist;
    if (!(after <= before + 1e-9)) return fail("dist grew", after, before + 1e-9);
  }
  return "";
}

inline std::string partial_frobenius() {
  Rng rng(15);
  for (int trial = 0; trial < 30; ++trial) {
    const RealMatrix a = gaussian_matrix<double>(rng, 6, 6);
    Eigen::JacobiSVD<RealMatrix> ref(a);
    for (Index r = 1; r <= 3; ++r) {
      const double expected = ref.singularValues().head(r).norm();
      const double err = std::abs(partial_frobenius_norm(a, r) - expected);
      if (!(err <= 1e-10 * expected)) return fail("partial Frobenius norm", err, 1e-10 * expected);
    }
  }
  return "";
}

inline std::string sensing_adjoint() {
  GaussianSensing op(50, 7, 5, 16);
  Rng rng(17);
  const RealMatrix x = gaussian_matrix<double>(rng, 7, 5);
  const RealVector y = gaussian_matrix<double>(rng, 50, 1);
  const double lhs = op.apply(x).dot(y);
  const double rhs = (x.array() * op.adjoint(y).array()).sum();
  const double err = std::abs(lhs - rhs);
  return err <= 1e-10 * std::abs(lhs) + 1e-12 ? "" : fail("<A(X), y> vs <X, A*(y)>", err, 1e-10 * std::abs(lhs));
}

inline std::string csv_and_config() {
  std::ostringstream out;
  write_csv({CsvRow{"completion", "scaledgd", 10.0, 1, 2, 0.125, std::nullopt, 0.0}}, out);
  if (out.str() != std::string(kCsvHeader) + "\ncompletion,scaledgd,10,1,2,0.125,,0\n") return "unexpected CSV text";
  try {
    parse_config("etaa = 0.5");
    return "unknown key accepted";
  } catch (const ConfigError& e) {
    if (std::string(e.what()) != "unknown key at line 1") return std::string("wrong message: ") + e.what();
  }
  return "";
}

inline std::string grid_determinism() {
  const auto cfg = parse_config(
      "problem = completion\nn = 30\nr = 2\np = 0.5\nkappa = 2, 10\nalgos = scaledgd, vanilla_gd\n"
      "max_iters = 10\ntiming = off\n");
  std::ostringstream a, b;
  write_csv(run_grid(cfg), a);
  write_csv(run_grid(cfg), b);
  return a.str() == b.str() ? "" : "reruns differ";
}

}  // namespace selftest_detail

/// Quick invariant suite used by `lowrank selftest`. Prints one line per
/// check and returns true when all pass.
inline bool run_selftest(std::ostream& out) {
  using namespace selftest_detail;
  const std::vector<Check> checks = {
      {"quasi_newton_form", quasi_newton},
      {"scaled_step_covariance", covariance},
      {"truncation_sup_norm_bound", truncation_bound},
      {"scaled_projection_nonexpansive", projection_nonexpansive},
      {"partial_frobenius_norm", partial_frobenius},
      {"sensing_adjoint", sensing_adjoint},
      {"csv_and_config_contract", csv_and_config},
      {"grid_determinism", grid_determinism},
  };
  bool ok = true;
  for (const auto& check : checks) {
    std::string detail;
    try {
      detail = check.run();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (detail.empty()) {
      out << "PASS " << check.name << '\n';
    } else {
      out << "FAIL " << check.name << ": " << detail << '\n';
      ok = false;
    }
  }
  return ok;
}

}  // namespace lowrank
