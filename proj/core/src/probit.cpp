#include "tmvn/probit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "tmvn/csv.hpp"
#include "tmvn/error.hpp"

namespace tmvn {

ProbitModel::ProbitModel(Vector y, Matrix x, Matrix v, std::vector<std::string> names)
    : y_(std::move(y)), x_(std::move(x)), v_(std::move(v)), names_(std::move(names)) {
  if (x_.rows() == 0 || x_.cols() == 0) throw InvalidArgument("empty design matrix");
  if (y_.size() != x_.rows()) throw InvalidArgument("response and design disagree in length");
  for (Index i = 0; i < y_.size(); ++i) {
    if (y_[i] != 0.0 && y_[i] != 1.0) throw InvalidArgument("responses must be 0 or 1");
  }
  if (v_.rows() != x_.cols() || v_.cols() != x_.cols()) {
    throw InvalidArgument("prior covariance must be k x k");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(x_);
  if (qr.rank() < x_.cols()) throw RankDeficient("design matrix lacks full column rank");
  if (names_.empty()) {
    for (Index j = 0; j < x_.cols(); ++j) names_.push_back("beta" + std::to_string(j));
  }
  if (static_cast<Index>(names_.size()) != x_.cols()) {
    throw InvalidArgument("one name per coefficient expected");
  }
}

Matrix ProbitModel::signed_design() const {
  const Vector sign = 2.0 * y_.array() - 1.0;
  return sign.asDiagonal() * x_;
}

Matrix symmetric_sqrt(const Matrix& v) {
  if (v.rows() != v.cols()) throw InvalidArgument("matrix must be square");
  if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12 * v.cwiseAbs().maxCoeff()) {
    throw NotPositiveDefinite("matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(v);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues().array() > 0.0).all()) {
    throw NotPositiveDefinite("matrix has a non-positive eigenvalue");
  }
  const Vector root = eig.eigenvalues().array().sqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

TruncationProblem build_problem(const ProbitModel& model) {
  const Index m = model.m();
  const Index k = model.k();
  Matrix a(m, k + m);
  a.leftCols(k) = model.signed_design() * symmetric_sqrt(model.prior_covariance());
  a.rightCols(m) = -Matrix::Identity(m, m);
  return TruncationProblem::from_constraints(std::move(a), Vector::Zero(m),
                                             Vector::Constant(m, std::numeric_limits<double>::infinity()));
}

double quantile(std::vector<double> values, double level) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = level * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

PosteriorDraws sample_posterior(const ProbitModel& model, Index n, std::uint64_t seed,
                                const SamplerOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const SampleBatch batch = sample_problem(build_problem(model), n, seed, true, options);
  const Index k = model.k();
  PosteriorDraws out;
  out.beta = batch.samples.leftCols(k) * symmetric_sqrt(model.prior_covariance());
  out.acceptance_rate = batch.acceptance_rate;
  out.proposals = batch.proposals_used;
  out.seed = seed;
  out.mean = out.beta.colwise().mean().transpose();
  out.quantiles.resize(k, static_cast<Index>(kSummaryLevels.size()));
  for (Index j = 0; j < k; ++j) {
    std::vector<double> col(out.beta.col(j).data(), out.beta.col(j).data() + n);
    for (std::size_t q = 0; q < kSummaryLevels.size(); ++q) {
      out.quantiles(j, static_cast<Index>(q)) = quantile(col, kSummaryLevels[q]);
    }
  }
  out.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

ProbitModel read_probit_csv(const std::string& path, const std::string& response,
                            double prior_scale) {
  if (!(prior_scale > 0.0)) throw InvalidArgument("prior scale must be positive");
  const CsvTable t = read_csv_table_file(path);
  if (t.header.empty()) throw InvalidArgument("'" + path + "' needs a header row");
  const auto it = std::find(t.header.begin(), t.header.end(), response);
  if (it == t.header.end()) throw InvalidArgument("no column named '" + response + "'");
  const auto resp = static_cast<std::size_t>(it - t.header.begin());
  const auto m = static_cast<Index>(t.rows.size());
  const auto k = static_cast<Index>(t.header.size());  // intercept replaces the response
  Vector y(m);
  Matrix x(m, k);
  std::vector<std::string> names{"intercept"};
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (j != resp) names.push_back(t.header[j]);
  }
  for (Index i = 0; i < m; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    if (row.size() != t.header.size()) throw InvalidArgument("'" + path + "' has ragged rows");
    y[i] = row[resp];
    x(i, 0) = 1.0;
    Index c = 1;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j != resp) x(i, c++) = row[j];
    }
  }
  return ProbitModel(std::move(y), std::move(x), prior_scale * Matrix::Identity(k, k),
                     std::move(names));
}

}  // namespace tmvn
