#include "tmvn/problem.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "tmvn/error.hpp"
#include "tmvn/special_fn.hpp"
#include "test_util.hpp"

namespace tmvn {
namespace {

Matrix permuted(const Matrix& s, const Permutation& p) {
  const Index n = s.rows();
  Matrix out(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) out(i, j) = s(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
  }
  return out;
}

TEST(Factorize, CovarianceReproducesPermutedSigma) {
  std::mt19937_64 rng(1);
  for (Index d : {1, 2, 5, 20}) {
    const Matrix sigma = test::random_spd(d, rng);
    Vector lo, hi;
    test::random_bounds(d, rng, lo, hi);
    for (bool reorder : {false, true}) {
      const FactoredProblem fp = factorize(TruncationProblem::from_covariance(sigma, lo, hi), reorder);
      EXPECT_LT((fp.L() * fp.L().transpose() - permuted(sigma, fp.permutation())).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_TRUE(fp.Q().isIdentity());
      for (Index k = 0; k < d; ++k) {
        EXPECT_EQ(fp.lower()[k], lo[fp.permutation()[static_cast<std::size_t>(k)]]);
        EXPECT_EQ(fp.upper()[k], hi[fp.permutation()[static_cast<std::size_t>(k)]]);
      }
      Permutation sorted = fp.permutation();
      std::sort(sorted.begin(), sorted.end());
      for (Index k = 0; k < d; ++k) EXPECT_EQ(sorted[static_cast<std::size_t>(k)], k);
    }
  }
}

TEST(Factorize, ConstraintFormIsLQ) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  const Index m = 3;
  const Index d = 6;
  Matrix a(m, d);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < d; ++j) a(i, j) = z(rng);
  }
  Vector lo, hi;
  test::random_bounds(m, rng, lo, hi);
  const FactoredProblem fp = factorize(TruncationProblem::from_constraints(a, lo, hi));
  EXPECT_EQ(fp.m(), m);
  EXPECT_EQ(fp.d(), d);
  EXPECT_EQ(fp.free_dims(), d - m);
  EXPECT_LT((fp.Q().transpose() * fp.Q() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-12);
  Matrix pa(m, d);
  for (Index k = 0; k < m; ++k) pa.row(k) = a.row(fp.permutation()[static_cast<std::size_t>(k)]);
  EXPECT_LT((fp.L() * fp.Q().leftCols(m).transpose() - pa).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_TRUE((fp.diag().array() > 0.0).all());
  EXPECT_TRUE(fp.L().isLowerTriangular());
}

TEST(Factorize, DerivedQuantities) {
  const Matrix sigma = (Matrix(2, 2) << 4.0, 2.0, 2.0, 5.0).finished();
  const auto p = TruncationProblem::from_covariance(sigma, Vector::Constant(2, 1.0), Vector::Constant(2, kInf));
  const FactoredProblem fp = factorize(p, false);
  // L = [[2, 0], [1, 2]].
  EXPECT_NEAR(fp.diag()[0], 2.0, 1e-15);
  EXPECT_NEAR(fp.diag()[1], 2.0, 1e-15);
  EXPECT_NEAR(fp.unit_lower()(1, 0), 0.5, 1e-15);
  EXPECT_EQ(fp.coupling()(0, 0), 0.0);
  EXPECT_NEAR(fp.coupling_rows()(1, 0), 0.5, 1e-15);
  EXPECT_NEAR(fp.scaled_lower()[0], 0.5, 1e-15);
  Vector lo, hi;
  fp.sequential_bounds((Vector(2) << 1.0, 0.0).finished(), lo, hi);
  EXPECT_NEAR(lo[0], 0.5, 1e-15);
  EXPECT_NEAR(lo[1], 0.5 - 0.5, 1e-15);
  EXPECT_EQ(hi[1], kInf);
}

TEST(Reorder, PicksTheTightestVariableFirst) {
  const Matrix sigma = Matrix::Identity(3, 3);
  const Vector lo = (Vector(3) << -1.0, 2.0, 0.0).finished();
  const Vector hi = Vector::Constant(3, kInf);
  const Permutation p = reorder_heuristic(TruncationProblem::from_covariance(sigma, lo, hi));
  EXPECT_EQ(p, (Permutation{1, 2, 0}));
}

TEST(Reorder, TiesGoToLowestIndex) {
  const Matrix sigma = Matrix::Identity(4, 4);
  const Permutation p = reorder_heuristic(test::covariance_problem(sigma, 0.0, 1.0));
  EXPECT_EQ(p, (Permutation{0, 1, 2, 3}));
}

TEST(Reorder, ConditionsOnTruncatedMeans) {
  // Strong positive correlation: once X1 is pushed into the upper tail, the
  // conditional interval of X2 = [1, inf) becomes likely, so the
  // independent tail X3 >= 1.5 goes second.
  Matrix sigma = Matrix::Identity(3, 3);
  sigma(0, 1) = sigma(1, 0) = 0.95;
  const Vector lo = (Vector(3) << 2.0, 1.0, 1.5).finished();
  const Permutation p = reorder_heuristic(TruncationProblem::from_covariance(sigma, lo, Vector::Constant(3, kInf)));
  EXPECT_EQ(p, (Permutation{0, 2, 1}));
}

TEST(Problem, Validation) {
  const Matrix eye = Matrix::Identity(2, 2);
  EXPECT_THROW(TruncationProblem::from_covariance(eye, Vector::Constant(2, 1.0), Vector::Constant(2, 0.0)),
               DegenerateInterval);
  EXPECT_THROW(TruncationProblem::from_covariance(eye, Vector::Constant(3, 0.0), Vector::Constant(3, 1.0)),
               InvalidArgument);
  EXPECT_THROW(TruncationProblem::from_covariance(eye, Vector::Constant(2, kInf), Vector::Constant(2, kInf)),
               DegenerateInterval);
  const Matrix indefinite = (Matrix(2, 2) << 1.0, 2.0, 2.0, 1.0).finished();
  EXPECT_THROW(test::covariance_problem(indefinite, 0.0, 1.0), NotPositiveDefinite);
  const Matrix asym = (Matrix(2, 2) << 1.0, 0.2, 0.1, 1.0).finished();
  EXPECT_THROW(test::covariance_problem(asym, 0.0, 1.0), NotPositiveDefinite);
  const Matrix wide = Matrix::Ones(3, 2);
  EXPECT_THROW(TruncationProblem::from_constraints(wide, Vector::Zero(3), Vector::Ones(3)), RankDeficient);
}

TEST(Problem, DependentRowsAreRankDeficient) {
  Matrix a(2, 3);
  a << 1.0, 2.0, 3.0, 2.0, 4.0, 6.0;
  const auto p = TruncationProblem::from_constraints(a, Vector::Zero(2), Vector::Ones(2));
  EXPECT_THROW(factorize(p, false), RankDeficient);
  EXPECT_THROW(factorize(p, true), RankDeficient);
}

TEST(Problem, CovarianceOfConstraintForm) {
  Matrix a(2, 3);
  a << 1.0, 0.0, 1.0, 0.0, 2.0, 0.0;
  const auto p = TruncationProblem::from_constraints(a, Vector::Zero(2), Vector::Ones(2));
  EXPECT_EQ(p.m(), 2);
  EXPECT_EQ(p.d(), 3);
  EXPECT_TRUE(p.covariance().isApprox((Matrix(2, 2) << 2.0, 0.0, 0.0, 4.0).finished()));
}

}  // namespace
}  // namespace tmvn
