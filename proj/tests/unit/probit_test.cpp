#include "tmvn/probit.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracle_values.hpp"
#include "tmvn/error.hpp"
#include "tmvn/special_fn.hpp"

namespace tmvn {
namespace {

ProbitModel model_from(const oracle::ProbitCase& c) {
  Vector y(c.m);
  Matrix x(c.m, c.k);
  Matrix v(c.k, c.k);
  for (int i = 0; i < c.m; ++i) {
    y[i] = c.y[static_cast<std::size_t>(i)];
    for (int j = 0; j < c.k; ++j) x(i, j) = c.x[static_cast<std::size_t>(i * c.k + j)];
  }
  for (int i = 0; i < c.k; ++i) {
    for (int j = 0; j < c.k; ++j) v(i, j) = c.v[static_cast<std::size_t>(i * c.k + j)];
  }
  return ProbitModel(y, x, v);
}

TEST(Probit, SymmetricSqrt) {
  Matrix v(2, 2);
  v << 2.0, 0.5, 0.5, 1.0;
  const Matrix r = symmetric_sqrt(v);
  EXPECT_LT((r * r - v).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((r - r.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(symmetric_sqrt(bad), NotPositiveDefinite);
}

TEST(Probit, ProblemLayout) {
  const ProbitModel m = model_from(oracle::kProbitCases[1]);
  const TruncationProblem p = build_problem(m);
  EXPECT_EQ(p.m(), 8);
  EXPECT_EQ(p.d(), 10);
  EXPECT_FALSE(p.covariance_input());
  EXPECT_TRUE((p.lower().array() == 0.0).all());
  EXPECT_TRUE((p.upper().array() == kInf).all());
  const Matrix expected_left = m.signed_design() * symmetric_sqrt(m.prior_covariance());
  EXPECT_LT((p.matrix().leftCols(2) - expected_left).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_TRUE(Matrix(p.matrix().rightCols(8)).isApprox(-Matrix::Identity(8, 8)));
  EXPECT_DOUBLE_EQ(m.signed_design()(0, 1), 1.2);  // y = 0 flips the sign
}

TEST(Probit, ModelValidation) {
  const Matrix x = Matrix::Ones(3, 1);
  EXPECT_THROW(ProbitModel((Vector(3) << 0, 1, 2).finished(), x, Matrix::Identity(1, 1)), InvalidArgument);
  EXPECT_THROW(ProbitModel(Vector::Zero(2), x, Matrix::Identity(1, 1)), InvalidArgument);
  EXPECT_THROW(ProbitModel(Vector::Zero(3), Matrix::Ones(3, 2), Matrix::Identity(2, 2)), RankDeficient);
  EXPECT_THROW(ProbitModel(Vector::Zero(3), x, Matrix::Identity(2, 2)), InvalidArgument);
  const ProbitModel ok(Vector::Zero(3), x, Matrix::Identity(1, 1));
  EXPECT_EQ(ok.names(), (std::vector<std::string>{"beta0"}));
}

TEST(Probit, PosteriorMomentsMatchQuadrature) {
  for (const auto& c : oracle::kProbitCases) {
    const ProbitModel m = model_from(c);
    const Index n = 10000;
    const PosteriorDraws post = sample_posterior(m, n, 17);
    ASSERT_EQ(post.beta.rows(), n);
    ASSERT_EQ(post.beta.cols(), c.k);
    for (int j = 0; j < c.k; ++j) {
      const double sd = std::sqrt(c.cov[static_cast<std::size_t>(j * c.k + j)]);
      EXPECT_NEAR(post.mean[j], c.mean[static_cast<std::size_t>(j)], 3.0 * sd / std::sqrt(double(n)))
          << c.name << " coefficient " << j;
    }
  }
}

TEST(Probit, SummaryQuantilesAreOrdered) {
  const PosteriorDraws post = sample_posterior(model_from(oracle::kProbitCases[2]), 2000, 3);
  ASSERT_EQ(post.quantiles.rows(), 2);
  ASSERT_EQ(post.quantiles.cols(), 5);
  for (Index j = 0; j < 2; ++j) {
    for (Index q = 1; q < 5; ++q) EXPECT_LE(post.quantiles(j, q - 1), post.quantiles(j, q));
  }
  EXPECT_GT(post.acceptance_rate, 0.0);
  EXPECT_LE(post.acceptance_rate, 1.0);
}

TEST(Probit, QuantileIsLinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(quantile({1.0, 2.0}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile({1.0, 2.0}, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(quantile({7.0}, 0.3), 7.0);
  EXPECT_THROW(quantile({}, 0.5), InvalidArgument);
}

TEST(Probit, ReadsCsvWithIntercept) {
  const auto path = (std::filesystem::temp_directory_path() / "tmvn_probit.csv").string();
  std::ofstream(path) << "age,affair,kids\n30,1,0\n25,0,1\n41,1,1\n35,0,0\n";
  const ProbitModel m = read_probit_csv(path, "affair", 5.0);
  EXPECT_EQ(m.names(), (std::vector<std::string>{"intercept", "age", "kids"}));
  EXPECT_EQ(m.k(), 3);
  EXPECT_EQ(m.m(), 4);
  EXPECT_EQ(m.y(), (Vector(4) << 1, 0, 1, 0).finished());
  EXPECT_EQ(m.design()(2, 0), 1.0);
  EXPECT_EQ(m.design()(2, 1), 41.0);
  EXPECT_TRUE(m.prior_covariance().isApprox(5.0 * Matrix::Identity(3, 3)));
  EXPECT_THROW(read_probit_csv(path, "missing", 5.0), InvalidArgument);
  EXPECT_THROW(read_probit_csv(path, "affair", 0.0), InvalidArgument);
}

}  // namespace
}  // namespace tmvn
