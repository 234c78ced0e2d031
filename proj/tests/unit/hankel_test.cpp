#include <random>

#include <gtest/gtest.h>

#include "lowrank/operators/hankel.hpp"
#include "oracles/oracles.hpp"

namespace lowrank {
namespace {

// Sum_k <H_k, X> H_k with the orthonormal basis H_k = 1/sqrt(w_k) on diagonal k.
ComplexMatrix basis_expansion(const ComplexMatrix& x, const std::vector<Index>& ks) {
  const Index n = x.rows();
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (Index k : ks) {
    ComplexMatrix h = ComplexMatrix::Zero(n, n);
    Index len = 0;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i + j == k - 1) ++len;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i + j == k - 1) h(i, j) = 1.0 / std::sqrt(static_cast<double>(len));
    const Complex c = (h.adjoint() * x).trace();
    out += c * h;
  }
  return out;
}

TEST(HankelWeights, SmallCases) {
  EXPECT_EQ(hankel_weights(3), (RealVector(5) << 1, 2, 3, 2, 1).finished());
  EXPECT_EQ(hankel_weights(1), (RealVector(1) << 1).finished());
  EXPECT_EQ(hankel_weights(7).sum(), 49.0);
  const RealVector w = hankel_weights(6);
  for (Index k = 0; k < w.size(); ++k) EXPECT_EQ(w(k), w(w.size() - 1 - k));
  EXPECT_THROW(hankel_weights(0), DimensionError);
}

TEST(HankelProject, TwoByTwo) {
  RealMatrix x(2, 2);
  x << 1, 2, 3, 4;
  RealMatrix expected(2, 2);
  expected << 1, 2.5, 2.5, 4;
  EXPECT_EQ(hankel_project(x), expected);
}

TEST(HankelProject, FixesHankelMatrices) {
  RealVector vals(9);
  vals << 1, -2, 3, 0.5, 7, 1, 2, -1, 4;
  const RealMatrix h = hankel_from_diagonals<double>(vals);
  EXPECT_EQ(hankel_project(h), h);
  EXPECT_EQ(h(1, 3), vals(4));
}

TEST(HankelProject, MatchesBasisExpansion) {
  std::mt19937_64 gen(1);
  const ComplexMatrix x = oracle::random_complex_gaussian(gen, 6, 6);
  std::vector<Index> all;
  for (Index k = 1; k <= 11; ++k) all.push_back(k);
  EXPECT_LE((hankel_project(x) - basis_expansion(x, all)).norm(), 1e-12 * x.norm());
  const std::vector<Index> some{1, 4, 5, 11};
  const HankelSubset subset(6, some);
  EXPECT_LE((hankel_project(x, subset) - basis_expansion(x, some)).norm(), 1e-12 * x.norm());
}

TEST(HankelProject, OrthogonalProjectionIdentities) {
  std::mt19937_64 gen(2);
  const ComplexMatrix x = oracle::random_complex_gaussian(gen, 9, 9);
  const ComplexMatrix y = oracle::random_complex_gaussian(gen, 9, 9);
  const HankelSubset subset = sample_hankel_subset(9, 0.5, 3);
  for (const std::optional<HankelSubset>& s : {std::optional<HankelSubset>{}, std::optional<HankelSubset>{subset}}) {
    const ComplexMatrix hx = hankel_project(x, s);
    EXPECT_NEAR(inner(hx, y), inner(x, hankel_project(y, s)), 1e-12 * x.norm() * y.norm());
    EXPECT_LE((hankel_project(hx, s) - hx).norm(), 1e-12 * x.norm());
    EXPECT_LE(hx.norm(), x.norm() + 1e-12);
  }
  const ComplexMatrix hx = hankel_project(x);
  EXPECT_LE((hx - hankel_project(hx)).norm(), 1e-12 * x.norm());
}

TEST(HankelSubset, SamplingAndValidation) {
  const HankelSubset a = sample_hankel_subset(100, 0.3, 9);
  const HankelSubset b = sample_hankel_subset(100, 0.3, 9);
  EXPECT_EQ(a.indices(), b.indices());
  EXPECT_NEAR(a.count() / 199.0, 0.3, 0.1);
  EXPECT_EQ(sample_hankel_subset(5, 1.0, 1).count(), 9);
  EXPECT_THROW(HankelSubset(3, {0}), DimensionError);
  EXPECT_THROW(HankelSubset(3, {6}), DimensionError);
  EXPECT_THROW(hankel_project(RealMatrix(RealMatrix::Zero(2, 3))), DimensionError);
}

}  // namespace
}  // namespace lowrank
