#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "lowrank/core/alignment.hpp"
#include "lowrank/datagen/generators.hpp"
#include "lowrank/solvers/losses.hpp"
#include "lowrank/solvers/problem.hpp"
#include "lowrank/solvers/steps.hpp"
#include "oracles/oracles.hpp"

namespace lowrank {
namespace {

RealMatrix col(std::initializer_list<double> v) {
  RealMatrix m(v.size(), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

ProblemInstance<double> factorization(const RealMatrix& target) {
  ProblemInstance<double> p;
  p.data = problems::Factorization<double>{target};
  p.n1 = target.rows();
  p.n2 = target.cols();
  return p;
}

TEST(ScaledStep, ZeroStepIsIdentity) {
  std::mt19937_64 gen(1);
  const FactorPair<double> f(oracle::random_gaussian(gen, 5, 2), oracle::random_gaussian(gen, 4, 2));
  const auto out = scaled_step<double>(f, oracle::random_gaussian(gen, 5, 2), oracle::random_gaussian(gen, 4, 2), 0.0);
  EXPECT_EQ(out.left, f.left);
  EXPECT_EQ(out.right, f.right);
}

TEST(ScaledStep, HandExample) {
  RealMatrix xs = RealMatrix::Zero(2, 2);
  xs(0, 0) = 1.0;
  const FactorPair<double> f(col({2, 0}), col({1, 0}));
  const auto [gl, gr] = problem_gradients(factorization(xs), f);
  EXPECT_EQ(gl, col({1, 0}));
  EXPECT_EQ(gr, col({2, 0}));
  const auto out = scaled_step(f, gl, gr, 0.5);
  EXPECT_EQ(out.left, col({1.5, 0}));
  EXPECT_EQ(out.right, col({0.75, 0}));
}

TEST(VanillaGdStep, HandExampleAndZeroStep) {
  RealMatrix xs = RealMatrix::Zero(2, 2);
  xs(0, 0) = 1.0;
  const FactorPair<double> f(col({2, 0}), col({1, 0}));
  const auto [gl, gr] = problem_gradients(factorization(xs), f);
  const double sigma1 = 1.0;
  const auto out = vanilla_gd_step(f, gl, gr, 0.25 / sigma1);
  EXPECT_EQ(out.left, col({1.75, 0}));
  EXPECT_EQ(out.right, col({0.5, 0}));
  const auto same = vanilla_gd_step(f, gl, gr, 0.0);
  EXPECT_EQ(same.left, f.left);
}

TEST(ScaledStep, SingularGramThrows) {
  const FactorPair<double> f(RealMatrix::Zero(3, 1), RealMatrix::Ones(3, 1));
  EXPECT_THROW(scaled_step<double>(f, RealMatrix::Ones(3, 1), RealMatrix::Ones(3, 1), 0.5), SingularMatrixError);
  RealMatrix l(3, 2);
  l << 1, 2, 2, 4, 3, 6;  // rank one
  const FactorPair<double> g(l, RealMatrix::Ones(3, 2) + RealMatrix::Identity(3, 2));
  EXPECT_THROW(scaled_step<double>(g, RealMatrix::Ones(3, 2), RealMatrix::Ones(3, 2), 0.5), SingularMatrixError);
}

// One step from (LQ, RQ^{-H}) against the reparameterized step from (L, R).
template <typename Scalar>
double covariance_gap(const ProblemInstance<Scalar>& problem, const FactorPair<Scalar>& f,
                      const Matrix<Scalar>& q) {
  const auto [gl, gr] = problem_gradients(problem, f);
  const auto stepped = scaled_step(f, gl, gr, 0.5).reparameterized(q);
  const auto fq = f.reparameterized(q);
  const auto [gql, gqr] = problem_gradients(problem, fq);
  const auto other = scaled_step(fq, gql, gqr, 0.5);
  const double scale = std::sqrt(stacked_distance_squared(stepped, FactorPair<Scalar>(
      Matrix<Scalar>::Zero(f.rows(), f.rank()), Matrix<Scalar>::Zero(f.cols(), f.rank()))));
  return std::sqrt(stacked_distance_squared(stepped, other)) / scale;
}

TEST(ScaledStep, CovariantAcrossProblemKinds) {
  std::mt19937_64 gen(2);
  const Index n1 = 12, n2 = 10, r = 3;
  const auto truth = make_ground_truth(n1, n2, r, 5.0, 3);
  const RealMatrix xs = truth.matrix();
  std::vector<ProblemInstance<double>> list;
  list.push_back(factorization(xs));
  {
    ProblemInstance<double> p;
    auto op = std::make_shared<GaussianSensing>(200, n1, n2, 4);
    p.data = problems::Sensing{op, op->apply(xs)};
    p.n1 = n1;
    p.n2 = n2;
    list.push_back(p);
  }
  {
    ProblemInstance<double> p;
    auto mask = std::make_shared<BernoulliMask>(n1, n2, 0.5, 5);
    p.data = problems::Completion{mask, mask_project(*mask, xs), 0.5};
    p.n1 = n1;
    p.n2 = n2;
    list.push_back(p);
  }
  {
    ProblemInstance<double> p;
    p.data = problems::General<double>{weighted_squared_loss(xs, RealMatrix::Constant(n1, n2, 0.5) +
                                                                     RealMatrix(oracle::random_gaussian(gen, n1, n2).cwiseAbs())),
                                       xs};
    p.n1 = n1;
    p.n2 = n2;
    list.push_back(p);
  }
  for (const auto& problem : list) {
    for (int trial = 0; trial < 5; ++trial) {
      const FactorPair<double> f(oracle::random_gaussian(gen, n1, r), oracle::random_gaussian(gen, n2, r));
      const RealMatrix q = oracle::random_invertible(gen, r, 10.0);
      EXPECT_LE(covariance_gap(problem, f, q), 1e-9) << to_string(problem.kind());
    }
  }
}

TEST(ScaledStep, CovariantForHankelLoss) {
  std::mt19937_64 gen(3);
  const auto h = make_hankel_ground_truth(10, 2, 3.0, 6);
  ProblemInstance<Complex> p;
  const HankelSubset subset = sample_hankel_subset(10, 0.6, 7);
  p.data = problems::Hankel{subset, hankel_project<Complex>(h.X, subset), 0.6};
  p.n1 = p.n2 = 10;
  for (int trial = 0; trial < 5; ++trial) {
    const FactorPair<Complex> f(oracle::random_complex_gaussian(gen, 10, 2), oracle::random_complex_gaussian(gen, 10, 2));
    const ComplexMatrix q = oracle::random_complex_gaussian(gen, 2, 2) + 2.0 * ComplexMatrix::Identity(2, 2);
    EXPECT_LE(covariance_gap(p, f, q), 1e-9);
  }
}

TEST(VanillaGdStep, NonCovarianceWitness) {
  std::mt19937_64 gen(4);
  const auto truth = make_ground_truth(10, 8, 2, 4.0, 8);
  const auto problem = factorization(truth.matrix());
  const FactorPair<double> f(oracle::random_gaussian(gen, 10, 2), oracle::random_gaussian(gen, 8, 2));
  RealMatrix q = RealMatrix::Zero(2, 2);
  q(0, 0) = 2.0;
  q(1, 1) = 1.0;
  const auto [gl, gr] = problem_gradients(problem, f);
  const auto stepped = vanilla_gd_step(f, gl, gr, 0.1).reparameterized(q);
  const auto fq = f.reparameterized(q);
  const auto [gql, gqr] = problem_gradients(problem, fq);
  const auto other = vanilla_gd_step(fq, gql, gqr, 0.1);
  EXPECT_GT(std::sqrt(stacked_distance_squared(stepped, other)), 1e-3);
}

TEST(ScaledStep, QuasiNewtonKroneckerForm) {
  std::mt19937_64 gen(5);
  const Index n1 = 4, n2 = 3, r = 2;
  const auto problem = factorization(oracle::random_gaussian(gen, n1, 2) * oracle::random_gaussian(gen, 2, n2));
  const FactorPair<double> f(oracle::random_gaussian(gen, n1, r), oracle::random_gaussian(gen, n2, r));
  const auto [gl, gr] = problem_gradients(problem, f);
  const double eta = 0.5;
  const auto stepped = scaled_step(f, gl, gr, eta);

  // Block-diagonal preconditioner diag((R^T R) kron I_n1, (L^T L) kron I_n2)
  // on the column-major vectorization of (L, R).
  auto kron = [](const RealMatrix& a, const RealMatrix& b) {
    RealMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return k;
  };
  const Index nl = n1 * r, nr = n2 * r;
  RealMatrix h = RealMatrix::Zero(nl + nr, nl + nr);
  h.topLeftCorner(nl, nl) = kron(f.right.transpose() * f.right, RealMatrix::Identity(n1, n1));
  h.bottomRightCorner(nr, nr) = kron(f.left.transpose() * f.left, RealMatrix::Identity(n2, n2));
  RealVector x(nl + nr), g(nl + nr);
  x << Eigen::Map<const RealVector>(f.left.data(), nl), Eigen::Map<const RealVector>(f.right.data(), nr);
  g << Eigen::Map<const RealVector>(gl.data(), nl), Eigen::Map<const RealVector>(gr.data(), nr);
  const RealVector next = x - eta * h.inverse() * g;
  RealVector got(nl + nr);
  got << Eigen::Map<const RealVector>(stepped.left.data(), nl), Eigen::Map<const RealVector>(stepped.right.data(), nr);
  EXPECT_LE((next - got).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ScaledStep, FixedPointAtTruth) {
  const auto truth = make_ground_truth(9, 7, 3, 10.0, 2);
  const auto problem = factorization(truth.matrix());
  std::mt19937_64 gen(6);
  const auto f = truth.factors().reparameterized(oracle::random_invertible(gen, 3, 5.0));
  const auto [gl, gr] = problem_gradients(problem, f);
  EXPECT_LE(gl.norm() + gr.norm(), 1e-14);
  const auto out = scaled_step(f, gl, gr, 0.5);
  EXPECT_LE(std::sqrt(stacked_distance_squared(out, f)), 1e-14);
}

TEST(PsdStep, HandExampleFixedPointAndCovariance) {
  RealMatrix xs = RealMatrix::Zero(2, 2);
  xs(0, 0) = 1.0;
  EXPECT_EQ(scaledgd_psd_step<double>(col({2, 0}), xs, 0.5), col({1.25, 0}));

  std::mt19937_64 gen(7);
  const RealMatrix ls = oracle::random_gaussian(gen, 8, 3);
  const RealMatrix x = ls * ls.transpose();
  EXPECT_LE((scaledgd_psd_step<double>(ls, x, 0.5) - ls).norm(), 1e-12);

  const RealMatrix l = ls + 0.1 * oracle::random_gaussian(gen, 8, 3);
  const RealMatrix o = oracle::random_orthonormal(gen, 3, 3);
  const RealMatrix a = scaledgd_psd_step<double>(RealMatrix(l * o), x, 0.5);
  const RealMatrix b = scaledgd_psd_step<double>(l, x, 0.5) * o;
  EXPECT_LE((a - b).norm(), 1e-10 * b.norm());
}

TEST(RpcaIterate, ExactRecoveryFixedPoint) {
  const auto truth = make_ground_truth(40, 40, 3, 5.0, 9);
  const RealMatrix xs = truth.matrix();
  const RealMatrix ss = make_sparse_corruption(40, 40, 0.1, 10) * 10.0;
  const auto f = truth.factors();
  const auto out = rpca_iterate(f, RealMatrix(xs + ss), 0.1, 0.5);
  EXPECT_LE((out.sparse - ss).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(std::sqrt(stacked_distance_squared(out.factors, f)), 1e-12);

  const auto clean = rpca_iterate(f, xs, 0.1, 0.5);
  EXPECT_LE(clean.sparse.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE(std::sqrt(stacked_distance_squared(clean.factors, f)), 1e-13);
}

}  // namespace
}  // namespace lowrank
