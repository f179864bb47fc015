#pragma once

// Sequential (SOV) and minimax-tilted (MET) importance-sampling estimators
// of P(l <= A Z <= u) driven by the shifted Richtmyer lattice.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tmvn/problem.hpp"
#include "tmvn/tilting.hpp"

namespace tmvn {

enum class Method { Sov, Met };

std::string to_string(Method method);
/// Accepts "sov" or "met" (any case).
Method parse_method(const std::string& text);

/// One pass down the sequential decomposition. With point.size() == m - 1
/// (estimation) the last coordinate is integrated out exactly and x[m-1]
/// is left as NaN; with point.size() == m (sampling) every coordinate is
/// drawn. Returns log of the importance weight, -inf if a conditional
/// interval carries no representable mass.
double sov_path(const FactoredProblem& fp, const Vector& mu, const double* point,
                Index point_size, double* x);

struct PathResult {
  Vector x;
  double log_weight;
};

PathResult sov_path(const FactoredProblem& fp, const Vector& mu, const Vector& point);

struct EstimateResult {
  Method method = Method::Met;
  Index m = 0;
  Index d = 0;
  Index n_total = 0;  // 12 * ceil(n / 12)
  double log_estimate = 0.0;
  double rel_error = 0.0;
  std::optional<double> log_upper_bound;
  std::optional<double> log_lower_bound;
  std::optional<double> worst_case_rel_error;
  std::vector<double> batch_log_estimates;
  std::uint64_t seed = 0;
  double wall_time_ms = 0.0;
};

struct EstimateOptions {
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Solves the tilting problem itself; for SOV the saddle value is still
/// attached as the upper bound when the solver succeeds.
EstimateResult estimate(const FactoredProblem& fp, Method method, Index n, std::uint64_t seed,
                        const EstimateOptions& options = {});

/// Uses a precomputed tilt; log_lower, if given, yields the worst-case
/// relative error (exp(psi*) / l_L - 1) / sqrt(n).
EstimateResult estimate(const FactoredProblem& fp, Method method, const TiltingSolution& tilt,
                        Index n, std::uint64_t seed, std::optional<double> log_lower = {},
                        const EstimateOptions& options = {});

/// ceil(-log(alpha/2) (exp(psi*) - l_L)^2 / (2 eps^2)), at least 1.
/// Throws Overflow if the count does not fit in 63 bits.
std::uint64_t hoeffding_n(double psi_star, double log_lower, double eps, double alpha);

/// Number of worker threads to use for a request of `requested` (0 = auto).
unsigned resolve_threads(unsigned requested, std::size_t tasks);

}  // namespace tmvn
