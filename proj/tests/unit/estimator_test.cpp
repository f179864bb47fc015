#include "tmvn/estimator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracle_values.hpp"
#include "tmvn/error.hpp"
#include "tmvn/harness.hpp"
#include "tmvn/special_fn.hpp"
#include "test_util.hpp"

namespace tmvn {
namespace {

FactoredProblem example1(Index d) { return factorize(make_problem({.kind = ProblemKind::Example1, .d = d})); }

// |estimate - truth| within k standard errors (on the linear scale).
::testing::AssertionResult within_sigma(const EstimateResult& r, double log_truth, double k) {
  const double z = std::abs(std::expm1(r.log_estimate - log_truth)) / r.rel_error;
  if (z <= k) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << "estimate " << std::exp(r.log_estimate) << " vs "
                                       << std::exp(log_truth) << ": " << z << " standard errors";
}

TEST(Estimate, Example1AgainstExactOracle) {
  for (const auto& [d, truth] : oracle::kExample1) {
    const FactoredProblem fp = example1(d);
    const EstimateResult met = estimate(fp, Method::Met, 10000, 1);
    EXPECT_TRUE(within_sigma(met, std::log(truth), 3.0)) << "MET d=" << d;
    if (d <= 10) {
      const EstimateResult sov = estimate(fp, Method::Sov, 10000, 1);
      EXPECT_TRUE(within_sigma(sov, std::log(truth), 3.0)) << "SOV d=" << d;
    }
  }
}

TEST(Estimate, MetErrorShrinksRelativeToSov) {
  const FactoredProblem fp = example1(10);
  const EstimateResult met = estimate(fp, Method::Met, 10000, 3);
  const EstimateResult sov = estimate(fp, Method::Sov, 10000, 3);
  EXPECT_LT(met.rel_error, sov.rel_error);
}

TEST(Estimate, RecordsShapeAndBounds) {
  const FactoredProblem fp = example1(5);
  const EstimateResult r = estimate(fp, Method::Met, 100, 9);
  EXPECT_EQ(r.n_total, 108);
  EXPECT_EQ(r.batch_log_estimates.size(), 12u);
  EXPECT_EQ(r.m, 5);
  EXPECT_EQ(r.d, 5);
  EXPECT_EQ(r.seed, 9u);
  ASSERT_TRUE(r.log_upper_bound.has_value());
  EXPECT_LE(r.log_estimate, *r.log_upper_bound);
  EXPECT_FALSE(r.worst_case_rel_error.has_value());
  const EstimateResult sov = estimate(fp, Method::Sov, 100, 9);
  EXPECT_TRUE(sov.log_upper_bound.has_value());
}

TEST(Estimate, WorstCaseErrorFromLowerBound) {
  const FactoredProblem fp = example1(4);
  const TiltingSolution t = solve_tilting(fp);
  const double log_lower = t.psi_star - 0.1;
  const EstimateResult r = estimate(fp, Method::Met, t, 1200, 2, log_lower);
  ASSERT_TRUE(r.worst_case_rel_error.has_value());
  EXPECT_NEAR(*r.worst_case_rel_error, std::expm1(0.1) / std::sqrt(1200.0), 1e-14);
  EXPECT_EQ(*r.log_lower_bound, log_lower);
}

TEST(Estimate, IndependentOfThreadCount) {
  const FactoredProblem fp = example1(8);
  const EstimateResult a = estimate(fp, Method::Met, 2400, 5, {.threads = 1});
  const EstimateResult b = estimate(fp, Method::Met, 2400, 5, {.threads = 4});
  EXPECT_EQ(a.log_estimate, b.log_estimate);
  EXPECT_EQ(a.batch_log_estimates, b.batch_log_estimates);
  const EstimateResult c = estimate(fp, Method::Met, 2400, 6, {.threads = 1});
  EXPECT_NE(a.log_estimate, c.log_estimate);
}

TEST(Estimate, ConstraintFormMatchesCovarianceForm) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> z;
  for (const Index d : {3, 5}) {
    const Index m = 2;
    Matrix a(m, d);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < d; ++j) a(i, j) = z(rng);
    }
    const Vector lo = (Vector(2) << 0.3, -kInf).finished();
    const Vector hi = (Vector(2) << 2.0, 0.1).finished();
    const EstimateResult rc = estimate(factorize(TruncationProblem::from_constraints(a, lo, hi)), Method::Met, 12000, 1);
    const EstimateResult rs =
        estimate(factorize(TruncationProblem::from_covariance(a * a.transpose(), lo, hi)), Method::Met, 12000, 1);
    // Same law; both orderings use the same factor, so the estimates agree closely.
    EXPECT_NEAR(rc.log_estimate, rs.log_estimate, 3.0 * (rc.rel_error + rs.rel_error));
  }
}

TEST(Estimate, OneDimensionIsExact) {
  const auto p = TruncationProblem::from_covariance(Matrix::Constant(1, 1, 4.0), Vector::Constant(1, 3.0),
                                                    Vector::Constant(1, 5.0));
  const EstimateResult r = estimate(factorize(p), Method::Sov, 12, 1);
  EXPECT_NEAR(r.log_estimate, log_prob_interval({1.5, 2.5}, 0.0), 1e-13);
  EXPECT_EQ(r.rel_error, 0.0);
}

TEST(Estimate, RejectsTooSmallN) {
  EXPECT_THROW(estimate(example1(3), Method::Met, 0, 1), InvalidArgument);
}

TEST(SovPath, EstimationLeavesLastCoordinateOpen) {
  const FactoredProblem fp = example1(4);
  const Vector u = Vector::Constant(3, 0.4);
  const PathResult r = sov_path(fp, Vector::Zero(4), u);
  EXPECT_TRUE(std::isnan(r.x[3]));
  EXPECT_TRUE(std::isfinite(r.log_weight));
  const PathResult s = sov_path(fp, Vector::Zero(4), Vector::Constant(4, 0.4));
  ASSERT_TRUE(s.x.allFinite());
  const Vector lx = fp.L() * s.x;
  for (Index k = 0; k < 4; ++k) {
    EXPECT_GE(lx[k], fp.lower()[k] - 1e-12);
    EXPECT_LE(lx[k], fp.upper()[k] + 1e-12);
  }
  // Without a tilt the weight is the product of conditional masses, the same
  // in both modes apart from the last coordinate being included.
  EXPECT_NEAR(r.log_weight, s.log_weight, 1e-12);
}

TEST(Hoeffding, SampleSize) {
  // -log(0.025) * (2e-3 - 1e-3)^2 / (2e-10) = 18444.4
  EXPECT_EQ(hoeffding_n(std::log(2e-3), std::log(1e-3), 1e-5, 0.05), 18445u);
  EXPECT_EQ(hoeffding_n(std::log(1e-3), -kInf, 1e-5, 0.05), 18445u);
  EXPECT_EQ(hoeffding_n(std::log(1e-3), std::log(1e-3), 1e-5, 0.05), 1u);
  EXPECT_THROW(hoeffding_n(0.0, -kInf, 1e-12, 0.05), Overflow);
  EXPECT_THROW(hoeffding_n(0.0, -kInf, -1.0, 0.05), InvalidArgument);
  EXPECT_THROW(hoeffding_n(0.0, -kInf, 0.1, 1.5), InvalidArgument);
}

TEST(Method, Parse) {
  EXPECT_EQ(parse_method("met"), Method::Met);
  EXPECT_EQ(parse_method("SOV"), Method::Sov);
  EXPECT_EQ(to_string(Method::Met), "met");
  EXPECT_THROW(parse_method("mc"), InvalidArgument);
}

}  // namespace
}  // namespace tmvn
