#include "tmvn/bounds.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracle_values.hpp"
#include "tmvn/error.hpp"
#include "tmvn/harness.hpp"
#include "tmvn/special_fn.hpp"
#include "tmvn/tilting.hpp"
#include "test_util.hpp"

namespace tmvn {
namespace {

FactoredProblem example1(Index d) { return factorize(make_problem({.kind = ProblemKind::Example1, .d = d})); }

TEST(LowerBound, BelowExactAndClose) {
  for (const auto& [d, truth] : oracle::kExample1) {
    const LowerBoundSolution lb = lower_bound(example1(d));
    EXPECT_LE(lb.log_lower, std::log(truth)) << d;
    EXPECT_GT(lb.log_lower, std::log(truth) - 0.02) << d;
    EXPECT_TRUE(lb.converged) << d;
  }
}

TEST(LowerBound, ReferenceValueExampleOneDimTen) {
  // Reference lower bound for Example I at d = 10.
  const LowerBoundSolution lb = lower_bound(example1(10));
  EXPECT_LT(test::rel_diff(std::exp(lb.log_lower), 8.5483e-15), 1e-3);
}

TEST(LowerBound, AnyParameterGivesAValidBound) {
  const FactoredProblem fp = example1(3);
  const double log_truth = std::log(oracle::kExample1[1].second);
  std::mt19937_64 rng(51);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 200; ++rep) {
    Vector nu(3), sigma(3);
    for (Index i = 0; i < 3; ++i) {
      nu[i] = z(rng);
      sigma[i] = std::exp(0.7 * z(rng));
    }
    EXPECT_LE(lower_bound_value(fp, nu, sigma), log_truth);
  }
}

TEST(LowerBound, ExactForIndependentCoordinates) {
  const Vector lo = (Vector(3) << -0.3, 1.0, -kInf).finished();
  const Vector hi = (Vector(3) << 0.4, kInf, -1.0).finished();
  const Matrix sigma = Vector(Vector::LinSpaced(3, 1.0, 2.0)).asDiagonal();
  const auto p = TruncationProblem::from_covariance(sigma, lo, hi);
  double exact = 0.0;
  for (Index i = 0; i < 3; ++i) {
    const double s = std::sqrt(sigma(i, i));
    exact += log_prob_interval({lo[i] / s, hi[i] / s}, 0.0);
  }
  const LowerBoundSolution lb = lower_bound(p, factorize(p));
  EXPECT_NEAR(lb.log_lower, exact, 1e-6);
}

TEST(LowerBound, BelowUpperBoundOnRandomProblems) {
  std::mt19937_64 rng(52);
  for (int rep = 0; rep < 10; ++rep) {
    const Index d = 2 + rep % 6;
    Vector lo, hi;
    test::random_bounds(d, rng, lo, hi);
    const FactoredProblem fp = factorize(TruncationProblem::from_covariance(test::random_spd(d, rng), lo, hi));
    EXPECT_LE(lower_bound(fp).log_lower, solve_tilting(fp).psi_star + 1e-10);
  }
}

TEST(LowerBound, Validation) {
  Matrix a(1, 2);
  a << 1.0, 1.0;
  const auto p = TruncationProblem::from_constraints(a, Vector::Zero(1), Vector::Ones(1));
  EXPECT_THROW(lower_bound(factorize(p)), InvalidArgument);
  const auto q = make_problem({.kind = ProblemKind::Example1, .d = 3});
  EXPECT_THROW(lower_bound(q, example1(4)), InvalidArgument);
  EXPECT_THROW(lower_bound_value(example1(2), Vector::Zero(2), Vector::Zero(2)), InvalidArgument);
}

TEST(TailQp, IdentityIsFullyActive) {
  const auto p = TruncationProblem::from_covariance(Matrix::Identity(4, 4), Vector::Ones(4), Vector::Constant(4, kInf));
  const FactoredProblem fp = factorize(p, false);
  const Vector dir = (Vector(4) << 1.0, 2.0, 0.5, 1.5).finished();
  const TailProgram tp = solve_tail_qp(fp, 3.0, dir);
  EXPECT_EQ(tp.active.size(), 4u);
  EXPECT_TRUE(tp.inactive.empty());
  EXPECT_LT((tp.x_qp - 3.0 * dir).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(tp.objective, 4.5 * dir.squaredNorm(), 1e-10);
  EXPECT_LT(tail_qp_residual(fp, tp), 1e-10);
}

TEST(TailQp, InactiveConstraintAndQ) {
  Matrix sigma(2, 2);
  sigma << 1.0, 0.9, 0.9, 1.0;
  const auto p = TruncationProblem::from_covariance(sigma, Vector::Ones(2), Vector::Constant(2, kInf));
  const FactoredProblem fp = factorize(p, false);
  const TailProgram tp = solve_tail_qp(fp, 2.0, (Vector(2) << 1.0, 0.5).finished());
  ASSERT_EQ(tp.active, (std::vector<Index>{0}));
  ASSERT_EQ(tp.inactive, (std::vector<Index>{1}));
  EXPECT_NEAR(tp.q[0], 0.4, 1e-12);
  EXPECT_TRUE(tp.zero_q.empty());
  EXPECT_LT(tail_qp_residual(fp, tp), 1e-10);
  EXPECT_NEAR(tp.objective, 2.0, 1e-12);

  const TailProgram tie = solve_tail_qp(fp, 2.0, (Vector(2) << 1.0, 0.9).finished());
  EXPECT_EQ(tie.zero_q.size() + tie.active.size(), 2u);
}

TEST(TailQp, MultipliersFromRandomProblems) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    const Index d = 2 + rep % 7;
    const Matrix sigma = test::random_spd(d, rng);
    const FactoredProblem fp =
        factorize(TruncationProblem::from_covariance(sigma, Vector::Ones(d), Vector::Constant(d, kInf)), false);
    Vector dir(d);
    for (Index i = 0; i < d; ++i) dir[i] = u(rng);
    const TailProgram tp = solve_tail_qp(fp, 1.5, dir);
    EXPECT_LT(tail_qp_residual(fp, tp), 1e-9);
    EXPECT_GE(tp.q.size() == 0 ? 0.0 : tp.q.minCoeff(), -1e-8);
  }
}

TEST(TailAsymptotic, OneDimensionIsMillsRatio) {
  const auto p = TruncationProblem::from_covariance(Matrix::Identity(1, 1), Vector::Constant(1, 5.0),
                                                    Vector::Constant(1, kInf));
  const FactoredProblem fp = factorize(p);
  const Vector dir = Vector::Ones(1);
  const TailProgram tp = solve_tail_qp(fp, 5.0, dir);
  EXPECT_NEAR(tail_asymptotic(fp, 5.0, dir, tp), log_phi(5.0) - std::log(5.0), 1e-12);
}

TEST(TailAsymptotic, ApproachesExactIndependentTail) {
  const Index d = 5;
  const Vector dir = Vector::Ones(d);
  double prev_gap = kInf;
  for (const double gamma : {2.0, 4.0, 8.0}) {
    const FactoredProblem fp = factorize(make_problem({.kind = ProblemKind::TailFamily, .d = d, .gamma = gamma}));
    const TailProgram tp = solve_tail_qp(fp, gamma, dir);
    const double gap = std::abs(tail_asymptotic(fp, gamma, dir, tp) - d * log_phi_bar(gamma));
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap, 0.1);
}

TEST(TailAsymptotic, OrthantFactorWhenQVanishes) {
  Matrix sigma(2, 2);
  sigma << 1.0, 0.5, 0.5, 1.0;
  const auto p = TruncationProblem::from_covariance(sigma, Vector::Ones(2), Vector::Constant(2, kInf));
  const FactoredProblem fp = factorize(p, false);
  const Vector dir = (Vector(2) << 1.0, 0.5).finished();
  const TailProgram tp = solve_tail_qp(fp, 10.0, dir);
  ASSERT_EQ(tp.zero_q.size(), 1u);
  // Active block alone: exp(-gamma^2/2)/(gamma sqrt(2 pi)), halved.
  EXPECT_NEAR(tail_asymptotic(fp, 10.0, dir, tp), log_phi(10.0) - std::log(10.0) + std::log(0.5), 1e-10);
}

TEST(Vre, Validation) {
  const Matrix eye = Matrix::Identity(2, 2);
  EXPECT_THROW(vre_diagnostic(eye, Vector::Ones(2), {1.0, 0.0}, 120, 1), InvalidArgument);
  EXPECT_THROW(vre_diagnostic(eye, (Vector(2) << 1.0, -1.0).finished(), {1.0}, 120, 1), InvalidArgument);
  EXPECT_THROW(vre_diagnostic(eye, Vector::Ones(2), {}, 120, 1), InvalidArgument);
}

TEST(Vre, RowsForIdentity) {
  const auto rows = vre_diagnostic(Matrix::Identity(3, 3), Vector::Ones(3), {1.0, 3.0}, 1200, 1);
  ASSERT_EQ(rows.size(), 2u);
  for (const VreRow& r : rows) {
    EXPECT_NEAR(r.log_psi_star, 3.0 * log_phi_bar(r.gamma), 1e-10);
    EXPECT_NEAR(r.log_met, r.log_psi_star, 1e-10);
    EXPECT_NEAR(r.envelope_ratio, 1.0, 1e-10);
    ASSERT_TRUE(r.log_asymptote.has_value());
  }
}

}  // namespace
}  // namespace tmvn
