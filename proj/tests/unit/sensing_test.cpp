#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lowrank/operators/sensing.hpp"
#include "oracles/oracles.hpp"

namespace lowrank {
namespace {

TEST(GaussianSensing, ZeroInputGivesZero) {
  GaussianSensing op(30, 4, 5, 1);
  EXPECT_EQ(op.apply(RealMatrix::Zero(4, 5)).norm(), 0.0);
  EXPECT_EQ(op.adjoint(RealVector::Zero(30)).norm(), 0.0);
}

TEST(GaussianSensing, ApplyMatchesExplicitSum) {
  GaussianSensing op(12, 3, 4, 2);
  std::mt19937_64 gen(1);
  const RealMatrix x = oracle::random_gaussian(gen, 3, 4);
  const RealVector y = op.apply(x);
  for (Index k = 0; k < 12; ++k) {
    const RealMatrix a = op.measurement(k);
    double s = 0.0;
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 4; ++j) s += a(i, j) * x(i, j);
    EXPECT_NEAR(y(k), s, 1e-13);
  }
}

TEST(GaussianSensing, AdjointIdentity) {
  GaussianSensing op(200, 7, 9, 3);
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 5; ++trial) {
    const RealMatrix x = oracle::random_gaussian(gen, 7, 9);
    const RealVector y = oracle::random_gaussian(gen, 200, 1);
    const double lhs = op.apply(x).dot(y);
    const double rhs = inner(x, op.adjoint(y));
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(lhs));
  }
}

TEST(GaussianSensing, FusedResidualAdjointMatchesComposition) {
  GaussianSensing op(150, 6, 10, 4);
  std::mt19937_64 gen(3);
  const RealMatrix x = oracle::random_gaussian(gen, 6, 10);
  const RealVector y = oracle::random_gaussian(gen, 150, 1);
  const RealMatrix fused = op.residual_adjoint(x, y);
  const RealMatrix composed = op.adjoint(op.apply(x) - y);
  EXPECT_LE((fused - composed).norm(), 1e-12 * composed.norm());
}

TEST(GaussianSensing, Linearity) {
  GaussianSensing op(80, 5, 6, 5);
  std::mt19937_64 gen(4);
  const RealMatrix x = oracle::random_gaussian(gen, 5, 6);
  const RealMatrix z = oracle::random_gaussian(gen, 5, 6);
  const RealVector lhs = op.apply(RealMatrix(2.5 * x - 0.75 * z));
  const RealVector rhs = 2.5 * op.apply(x) - 0.75 * op.apply(z);
  EXPECT_LE((lhs - rhs).norm(), 1e-12 * rhs.norm());
}

TEST(GaussianSensing, RegenerationIsBitIdentical) {
  GaussianSensing a(40, 5, 5, 99), b(40, 5, 5, 99), c(40, 5, 5, 100);
  for (Index k = 0; k < 40; ++k) EXPECT_EQ(a.measurement(k), b.measurement(k));
  EXPECT_NE(a.measurement(0), c.measurement(0));
}

TEST(GaussianSensing, EntryVariance) {
  const Index m = 400;
  GaussianSensing op(m, 10, 10, 6);
  double sum2 = 0.0;
  for (Index k = 0; k < m; ++k) sum2 += op.measurement(k).squaredNorm();
  EXPECT_NEAR(sum2 / (m * 100.0), 1.0 / m, 0.05 / m);
}

TEST(GaussianSensing, RestrictedIsometrySpotCheck) {
  const Index n = 20, r = 2, m = 20 * n * r;
  GaussianSensing op(m, n, n, 7);
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    RealMatrix mat = oracle::random_gaussian(gen, n, r) * oracle::random_gaussian(gen, r, n);
    mat /= mat.norm();
    const double energy = op.apply(mat).squaredNorm();
    EXPECT_GE(energy, 0.8);
    EXPECT_LE(energy, 1.2);
  }
}

TEST(GaussianSensing, ShapeErrors) {
  GaussianSensing op(10, 3, 3, 1);
  EXPECT_THROW(op.apply(RealMatrix::Zero(3, 4)), DimensionError);
  EXPECT_THROW(op.adjoint(RealVector::Zero(9)), DimensionError);
  EXPECT_THROW(op.residual_adjoint(RealMatrix::Zero(3, 3), RealVector::Zero(11)), DimensionError);
  EXPECT_THROW(op.measurement(10), DimensionError);
}

TEST(BasisSensing, FlattensRowMajor) {
  BasisSensing op(2, 3);
  RealMatrix x(2, 3);
  x << 1, 2, 3, 4, 5, 6;
  const RealVector y = op.apply(x);
  for (Index k = 0; k < 6; ++k) EXPECT_EQ(y(k), static_cast<double>(k + 1));
  EXPECT_EQ(op.adjoint(y), x);
  EXPECT_EQ(op.residual_adjoint(x, y).norm(), 0.0);
}

TEST(BasisSensing, MeasurementsAreUnitMatrices) {
  BasisSensing op(3, 2);
  const RealMatrix a = op.measurement(3);
  EXPECT_EQ(a(1, 1), 1.0);
  EXPECT_EQ(a.sum(), 1.0);
}

}  // namespace
}  // namespace lowrank
