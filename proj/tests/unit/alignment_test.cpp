#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lowrank/core/alignment.hpp"
#include "lowrank/core/svd.hpp"
#include "oracles/oracles.hpp"

namespace lowrank {
namespace {

// Planted factors (U S^{1/2}, V S^{1/2}) with sigma linear from 1 to 1/kappa.
struct Planted {
  FactorPair<double> fstar;
  RealVector sigma;
  RealMatrix x;
};

Planted planted(std::mt19937_64& gen, Index n1, Index n2, Index r, double kappa) {
  RealVector sigma(r);
  for (Index i = 0; i < r; ++i) {
    sigma(i) = r == 1 ? 1.0 : 1.0 - (1.0 - 1.0 / kappa) * static_cast<double>(i) / (r - 1);
  }
  const RealMatrix u = oracle::random_orthonormal(gen, n1, r);
  const RealMatrix v = oracle::random_orthonormal(gen, n2, r);
  const RealVector root = sigma.cwiseSqrt();
  Planted p{FactorPair<double>(u * root.asDiagonal(), v * root.asDiagonal()), sigma, {}};
  p.x = p.fstar.product();
  return p;
}

// Direct evaluation of the scaled objective, independent of the library code.
double objective(const FactorPair<double>& f, const FactorPair<double>& fs, const RealVector& sigma,
                 const RealMatrix& q) {
  const RealMatrix s = sigma.cwiseSqrt().asDiagonal();
  const RealMatrix qinv_t = q.inverse().transpose();
  return ((f.left * q - fs.left) * s).squaredNorm() + ((f.right * qinv_t - fs.right) * s).squaredNorm();
}

TEST(OrthogonalAlign, IdentityWhenEqual) {
  std::mt19937_64 gen(1);
  const auto p = planted(gen, 8, 6, 3, 4.0);
  const RealMatrix o = orthogonal_align(p.fstar, p.fstar);
  EXPECT_LE((o - RealMatrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(OrthogonalAlign, UndoesRotation) {
  std::mt19937_64 gen(2);
  const auto p = planted(gen, 8, 6, 3, 4.0);
  const RealMatrix o0 = oracle::random_orthonormal(gen, 3, 3);
  const FactorPair<double> f(p.fstar.left * o0, p.fstar.right * o0);
  const RealMatrix o = orthogonal_align(f, p.fstar);
  EXPECT_LE((o - o0.transpose()).norm(), 1e-10);
  EXPECT_LE((o.transpose() * o - RealMatrix::Identity(3, 3)).norm(), 1e-10);
}

TEST(OrthogonalAlign, BeatsSampledOrthogonalMatrices) {
  std::mt19937_64 gen(3);
  const FactorPair<double> f(oracle::random_gaussian(gen, 7, 3), oracle::random_gaussian(gen, 5, 3));
  const FactorPair<double> fs(oracle::random_gaussian(gen, 7, 3), oracle::random_gaussian(gen, 5, 3));
  const RealMatrix o = orthogonal_align(f, fs);
  EXPECT_LE((o.transpose() * o - RealMatrix::Identity(3, 3)).norm(), 1e-10);
  const double best = std::sqrt(stacked_distance_squared(FactorPair<double>(f.left * o, f.right * o), fs));
  for (int i = 0; i < 1000; ++i) {
    const RealMatrix ob = oracle::random_orthonormal(gen, 3, 3);
    const double cand =
        std::sqrt(stacked_distance_squared(FactorPair<double>(f.left * ob, f.right * ob), fs));
    EXPECT_LE(best, cand + 1e-12);
  }
}

TEST(OrthogonalAlign, RejectsRankDeficientCrossProduct) {
  const FactorPair<double> f(RealMatrix::Zero(4, 2), RealMatrix::Zero(3, 2));
  const FactorPair<double> fs(RealMatrix::Ones(4, 2), RealMatrix::Ones(3, 2));
  EXPECT_THROW(orthogonal_align(f, fs), SingularMatrixError);
}

TEST(OptimalAlignment, ZeroAtTruth) {
  std::mt19937_64 gen(4);
  const auto p = planted(gen, 9, 7, 3, 10.0);
  const auto res = optimal_alignment(p.fstar, p.fstar, p.sigma);
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.dist, 1e-14);
  EXPECT_LE((res.Q - RealMatrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(OptimalAlignment, RecoversInvertibleAmbiguity) {
  std::mt19937_64 gen(5);
  const auto p = planted(gen, 10, 8, 2, 5.0);
  const RealMatrix d = RealVector((RealVector(2) << 2.0, 1.0 / 3.0).finished()).asDiagonal();
  const FactorPair<double> f(p.fstar.left * d, p.fstar.right * d.inverse());
  const auto res = optimal_alignment(f, p.fstar, p.sigma);
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.dist, 1e-10);
  EXPECT_LE((res.Q - d.inverse()).norm(), 1e-8);
}

TEST(OptimalAlignment, StationaryAndBeatsRandomSearch) {
  std::mt19937_64 gen(6);
  const auto p = planted(gen, 12, 10, 3, 10.0);
  const FactorPair<double> f(p.fstar.left + 0.05 * oracle::random_gaussian(gen, 12, 3),
                             p.fstar.right + 0.05 * oracle::random_gaussian(gen, 10, 3));
  const auto res = optimal_alignment(f, p.fstar, p.sigma);
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.criterion_residual, 1e-8 * p.sigma(0) * p.sigma(0));
  EXPECT_NEAR(res.dist * res.dist, objective(f, p.fstar, p.sigma, res.Q), 1e-12);

  // Procrustes start is never beaten by the returned Q from below.
  const RealMatrix o = orthogonal_align(f, p.fstar);
  EXPECT_LE(res.dist * res.dist, objective(f, p.fstar, p.sigma, o) + 1e-15);

  std::normal_distribution<double> nd;
  for (int i = 0; i < 10000; ++i) {
    // Mix local perturbations at several scales with fully random invertible Q.
    const double scale = i % 4 == 0 ? 1.0 : std::pow(10.0, -(i % 4));
    RealMatrix q = i % 4 == 0 ? oracle::random_invertible(gen, 3, 10.0) : RealMatrix(res.Q);
    if (i % 4 != 0) {
      for (Index k = 0; k < q.size(); ++k) q.data()[k] += scale * nd(gen);
    }
    if (std::abs(q.determinant()) < 1e-8) continue;
    EXPECT_LE(res.dist * res.dist, objective(f, p.fstar, p.sigma, q) + 1e-14);
  }
}

TEST(OptimalAlignment, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(7);
  const auto p = planted(gen, 8, 6, 3, 3.0);
  const FactorPair<double> f(oracle::random_gaussian(gen, 8, 3), oracle::random_gaussian(gen, 6, 3));
  const RealMatrix q = oracle::random_invertible(gen, 3, 3.0);
  const auto ev = detail::evaluate_alignment(f, p.fstar, p.sigma, q, 1e12);
  const RealMatrix d = oracle::random_gaussian(gen, 3, 3);
  const double h = 1e-6;
  const double fd = (objective(f, p.fstar, p.sigma, q + h * d) -
                     objective(f, p.fstar, p.sigma, q - h * d)) / (2 * h);
  EXPECT_NEAR(inner(ev.gradient, d), fd, 1e-6 * std::max(1.0, std::abs(fd)));
}

TEST(OptimalAlignment, ComplexGradientAndAlignment) {
  std::mt19937_64 gen(8);
  const Index n = 8, r = 2;
  ComplexMatrix u = oracle::random_complex_gaussian(gen, n, r);
  u = Eigen::HouseholderQR<ComplexMatrix>(u).householderQ() * ComplexMatrix::Identity(n, r);
  ComplexMatrix v = oracle::random_complex_gaussian(gen, n, r);
  v = Eigen::HouseholderQR<ComplexMatrix>(v).householderQ() * ComplexMatrix::Identity(n, r);
  const RealVector sigma = (RealVector(2) << 1.0, 0.25).finished();
  const RealVector root = sigma.cwiseSqrt();
  const FactorPair<Complex> fs(u * root.asDiagonal(), v * root.asDiagonal());

  ComplexMatrix q0 = oracle::random_complex_gaussian(gen, r, r) + 3.0 * ComplexMatrix::Identity(r, r);
  const FactorPair<Complex> f = fs.reparameterized(q0);
  const auto res = optimal_alignment(f, fs, sigma);
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.dist, 1e-9);

  // Finite-difference check of the complex gradient in real coordinates.
  const FactorPair<Complex> g(fs.left + 0.1 * oracle::random_complex_gaussian(gen, n, r),
                              fs.right + 0.1 * oracle::random_complex_gaussian(gen, n, r));
  const ComplexMatrix q = ComplexMatrix::Identity(r, r) + 0.2 * oracle::random_complex_gaussian(gen, r, r);
  const ComplexMatrix d = oracle::random_complex_gaussian(gen, r, r);
  const auto ev = detail::evaluate_alignment(g, fs, sigma, q, 1e12);
  const double h = 1e-6;
  const double fd = (scaled_objective(g, fs, sigma, ComplexMatrix(q + h * d)) -
                     scaled_objective(g, fs, sigma, ComplexMatrix(q - h * d))) / (2 * h);
  EXPECT_NEAR(inner(ev.gradient, d), fd, 1e-6 * std::max(1.0, std::abs(fd)));
}

TEST(OptimalAlignment, ReparameterizedTruthHasZeroDistance) {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = planted(gen, 15, 12, 4, 20.0);
    const RealMatrix q0 = oracle::random_invertible(gen, 4, 10.0);
    const auto res = optimal_alignment(p.fstar.reparameterized(q0), p.fstar, p.sigma);
    EXPECT_LE(res.dist, 1e-10 * p.sigma(0)) << "trial " << trial;
  }
}

TEST(OptimalAlignment, ProcrustesBound) {
  // dist(F, F*) <= sqrt(sqrt(2) + 1) ||L R^T - X*||_F
  std::mt19937_64 gen(10);
  const double c = std::sqrt(std::sqrt(2.0) + 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = planted(gen, 12, 9, 3, 5.0);
    const double scale = 0.02 * (1 + trial % 5);
    const FactorPair<double> f(p.fstar.left + scale * oracle::random_gaussian(gen, 12, 3),
                               p.fstar.right + scale * oracle::random_gaussian(gen, 9, 3));
    const auto res = optimal_alignment(f, p.fstar, p.sigma);
    EXPECT_LE(res.dist, c * (f.product() - p.x).norm() + 1e-12);
  }
}

TEST(Incoherence, SpikeAndFlat) {
  RealMatrix e1 = RealMatrix::Zero(4, 1);
  e1(0, 0) = 1.0;
  EXPECT_DOUBLE_EQ(incoherence_of(e1, e1), 4.0);
  const RealMatrix flat = RealMatrix::Constant(9, 1, 1.0 / 3.0);
  EXPECT_NEAR(incoherence_of(flat, flat), 1.0, 1e-12);
}

TEST(Incoherence, RangeAndRejection) {
  std::mt19937_64 gen(11);
  const RealMatrix u = oracle::random_orthonormal(gen, 30, 3);
  const RealMatrix v = oracle::random_orthonormal(gen, 20, 3);
  const double mu = incoherence_of(u, v);
  EXPECT_GE(mu, 1.0);
  EXPECT_LE(mu, 30.0 / 3.0);
  EXPECT_THROW(incoherence_of(RealMatrix(2.0 * u), v), DimensionError);
}

}  // namespace
}  // namespace lowrank
