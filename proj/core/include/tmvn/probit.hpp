#pragma once

// Bayesian probit regression with prior beta ~ N(0, V). With latent
// lambda ~ N(0, I_m), the posterior of beta is the law of V^{1/2} z_{1..k}
// where (z, lambda) is standard normal restricted to X~ V^{1/2} z >= lambda,
// X~ = diag(2y - 1) X. Exact draws then come from the truncated sampler.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tmvn/problem.hpp"
#include "tmvn/sampler.hpp"

namespace tmvn {

inline constexpr std::array<double, 5> kSummaryLevels{0.025, 0.25, 0.5, 0.75, 0.975};

class ProbitModel {
 public:
  /// y in {0,1}^m, X m x k of full column rank, V k x k positive definite.
  ProbitModel(Vector y, Matrix x, Matrix v, std::vector<std::string> names = {});

  const Vector& y() const noexcept { return y_; }
  const Matrix& design() const noexcept { return x_; }
  const Matrix& prior_covariance() const noexcept { return v_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  Index k() const noexcept { return x_.cols(); }
  Index m() const noexcept { return x_.rows(); }

  /// diag(2y - 1) X.
  Matrix signed_design() const;

 private:
  Vector y_;
  Matrix x_;
  Matrix v_;
  std::vector<std::string> names_;
};

/// Symmetric square root through the eigendecomposition; throws
/// NotPositiveDefinite unless every eigenvalue is positive.
Matrix symmetric_sqrt(const Matrix& v);

/// A = [X~ V^{1/2} | -I_m], l = 0, u = inf.
TruncationProblem build_problem(const ProbitModel& model);

struct PosteriorDraws {
  Matrix beta;  // n x k
  double acceptance_rate = 0.0;
  std::uint64_t proposals = 0;
  Vector mean;
  Matrix quantiles;  // k x 5 at kSummaryLevels
  std::uint64_t seed = 0;
  double wall_time_ms = 0.0;
};

PosteriorDraws sample_posterior(const ProbitModel& model, Index n, std::uint64_t seed,
                                const SamplerOptions& options = {});

/// Reads a CSV with a header; `response` names the 0/1 column and every
/// other column becomes a covariate after an automatic intercept. The prior
/// covariance is prior_scale * I.
ProbitModel read_probit_csv(const std::string& path, const std::string& response,
                            double prior_scale);

/// Sample quantile, linear interpolation between order statistics.
double quantile(std::vector<double> values, double level);

}  // namespace tmvn
