#include <gtest/gtest.h>

#include <random>

#include "geoaug/errors.hpp"
#include "geoaug/numcore.hpp"
#include "oracles.hpp"

using namespace geoaug;

namespace {

Matrix random_spd(std::mt19937_64& rng, Index n, double ridge = 1e-3) {
  const Matrix b = oracle::random_points(rng, n, n);
  Matrix a = b * b.transpose();
  a.diagonal().array() += ridge;
  return a;
}

}  // namespace

TEST(Cholesky, SolveMatchesGaussianElimination) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + trial % 9;
    const Matrix a = random_spd(rng, n, 0.1);
    const Vector b = oracle::random_points(rng, n, 1).col(0);
    const Vector x = solve_spd(a, b);
    const Vector ref = oracle::naive_solve(a, b);
    EXPECT_LT((x - ref).norm(), 1e-9 * (1.0 + ref.norm()));
  }
}

TEST(Cholesky, FactorReconstructsMatrix) {
  std::mt19937_64 rng(2);
  const Matrix a = random_spd(rng, 7);
  const CholeskyFactor f = cholesky(a);
  EXPECT_EQ(f.jitter(), 0.0);
  EXPECT_LT((f.lower() * f.lower().transpose() - a).norm(), 1e-12 * a.norm());
}

TEST(Cholesky, LogDetMatchesEigenvalues) {
  std::mt19937_64 rng(3);
  const Matrix a = random_spd(rng, 6, 0.5);
  double expected = 0.0;
  for (double ev : oracle::jacobi_eigenvalues(a)) expected += std::log(ev);
  EXPECT_NEAR(cholesky(a).log_det(), expected, 1e-9);
}

TEST(Cholesky, InverseTimesMatrixIsIdentity) {
  std::mt19937_64 rng(4);
  const Matrix a = random_spd(rng, 5, 0.5);
  const Matrix inv = cholesky(a).inverse();
  EXPECT_LT((inv * a - Matrix::Identity(5, 5)).norm(), 1e-10);
}

TEST(Cholesky, SingularMatrixNeedsJitter) {
  Matrix a(2, 2);
  a << 1, 1, 1, 1;
  EXPECT_THROW(cholesky(a, JitterSchedule::none()), NumericError);
  const CholeskyFactor f = cholesky(a);
  EXPECT_GT(f.jitter(), 0.0);
}

TEST(Cholesky, RejectsIndefiniteAndAsymmetric) {
  Matrix indefinite(2, 2);
  indefinite << 1, 0, 0, -5;
  EXPECT_THROW(cholesky(indefinite), NumericError);
  Matrix asym(2, 2);
  asym << 2, 1, 0, 2;
  EXPECT_THROW(cholesky(asym), NumericError);
  Matrix nan_matrix = Matrix::Identity(2, 2);
  nan_matrix(0, 0) = std::nan("");
  EXPECT_THROW(cholesky(nan_matrix), NumericError);
}

TEST(LuFactor, MatchesNaiveSolverOnIndefiniteSystems) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + trial % 7;
    Matrix a = oracle::random_points(rng, n, n);
    a = a + a.transpose().eval();
    a(n - 1, n - 1) = 0.0;
    const Vector b = oracle::random_points(rng, n, 1).col(0);
    const Vector x = solve_general(a, b);
    EXPECT_LT((a * x - b).norm(), 1e-9 * (1.0 + b.norm()));
    EXPECT_LT((x - oracle::naive_solve(a, b)).norm(), 1e-8 * (1.0 + x.norm()));
  }
}

TEST(LuFactor, DetectsSingularity) {
  Matrix a(3, 3);
  a << 1, 2, 3, 2, 4, 6, 0, 1, 1;
  EXPECT_THROW(LuFactor{a}, NumericError);
}

TEST(LuFactor, FactorOnceSolveMany) {
  std::mt19937_64 rng(6);
  const Matrix a = random_spd(rng, 4, 1.0);
  const LuFactor lu(a);
  for (int k = 0; k < 5; ++k) {
    const Vector b = oracle::random_points(rng, 4, 1).col(0);
    EXPECT_LT((a * lu.solve(b) - b).norm(), 1e-10);
  }
}

TEST(NormInf, MaxAbsoluteRowSum) {
  Matrix a(2, 2);
  a << 1, -2, 3, 0.5;
  EXPECT_DOUBLE_EQ(norm_inf(a), 3.5);
}
