#include "tmvn/estimator.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "parallel.hpp"
#include "tmvn/error.hpp"
#include "tmvn/qmc.hpp"
#include "tmvn/special_fn.hpp"

namespace tmvn {
namespace {

// Smallest and largest doubles strictly inside (0, 1).
constexpr double kTiny = std::numeric_limits<double>::min();
constexpr double kAlmostOne = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;

double log_mean_exp(const std::vector<double>& w) {
  const double top = *std::max_element(w.begin(), w.end());
  if (top == -kInf) return -kInf;
  double acc = 0.0;
  for (const double v : w) acc += std::exp(v - top);
  return top + std::log(acc / static_cast<double>(w.size()));
}

}  // namespace

std::string to_string(Method method) { return method == Method::Sov ? "sov" : "met"; }

Method parse_method(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "sov") return Method::Sov;
  if (t == "met") return Method::Met;
  throw InvalidArgument("unknown method '" + text + "' (expected sov or met)");
}

unsigned resolve_threads(unsigned requested, std::size_t tasks) {
  unsigned t = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(tasks, 1)));
}

double sov_path(const FactoredProblem& fp, const Vector& mu, const double* point,
                Index point_size, double* x) {
  const Index m = fp.m();
  const bool sampling = point_size == m;
  if (!sampling && point_size != m - 1) {
    throw InvalidArgument("point has " + std::to_string(point_size) + " coordinates for m = " +
                          std::to_string(m));
  }
  const RowMatrix& c = fp.coupling_rows();
  const double* sl = fp.scaled_lower().data();
  const double* su = fp.scaled_upper().data();
  double log_w = 0.0;
  for (Index k = 0; k < m; ++k) {
    double shift = 0.0;
    const double* row = c.data() + k * m;
    for (Index j = 0; j < k; ++j) shift += row[j] * x[j];
    const Interval1D iv(sl[k] - shift, su[k] - shift);
    if (k == point_size) {
      // Only reached in estimation mode: integrate the last coordinate.
      log_w += log_prob_interval(iv, 0.0);
      x[k] = std::numeric_limits<double>::quiet_NaN();
      break;
    }
    const double p = std::clamp(point[k], kTiny, kAlmostOne);
    const double mk = mu[k];
    const TruncatedDraw draw = trunc_norm_draw(iv, mk, p);
    x[k] = draw.value;
    log_w += draw.log_mass - draw.value * mk + 0.5 * mk * mk;
    if (draw.log_mass == -kInf) {
      for (Index j = k + 1; j < m; ++j) x[j] = std::numeric_limits<double>::quiet_NaN();
      return -kInf;
    }
  }
  return log_w;
}

PathResult sov_path(const FactoredProblem& fp, const Vector& mu, const Vector& point) {
  PathResult r{Vector(fp.m()), 0.0};
  r.log_weight = sov_path(fp, mu, point.data(), point.size(), r.x.data());
  return r;
}

EstimateResult estimate(const FactoredProblem& fp, Method method, Index n, std::uint64_t seed,
                        const EstimateOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  TiltingSolution tilt;
  bool have_tilt = true;
  if (method == Method::Met) {
    tilt = solve_tilting(fp);
  } else {
    try {
      tilt = solve_tilting(fp);
    } catch (const NoConvergence&) {
      have_tilt = false;
      tilt.mu_star = Vector::Zero(fp.m());
    }
  }
  EstimateResult r = estimate(fp, method, tilt, n, seed, std::nullopt, options);
  if (!have_tilt) r.log_upper_bound.reset();
  r.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

EstimateResult estimate(const FactoredProblem& fp, Method method, const TiltingSolution& tilt,
                        Index n, std::uint64_t seed, std::optional<double> log_lower,
                        const EstimateOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const Index m = fp.m();
  const QmcStream stream(m - 1, n, seed);
  const Index per_batch = stream.points_per_batch();
  const Vector mu = method == Method::Met ? tilt.mu_star : Vector::Zero(m);
  if (mu.size() != m) throw InvalidArgument("tilt does not match the problem dimension");

  std::vector<double> batch_log(kBatchCount);
  detail::parallel_for(kBatchCount, resolve_threads(options.threads, kBatchCount), [&](std::size_t b) {
    std::vector<double> point(static_cast<std::size_t>(std::max<Index>(m - 1, 1)));
    std::vector<double> x(static_cast<std::size_t>(m));
    std::vector<double> w(static_cast<std::size_t>(per_batch));
    for (Index k = 0; k < per_batch; ++k) {
      stream.point(static_cast<Index>(b), k + 1, point.data());
      w[static_cast<std::size_t>(k)] = sov_path(fp, mu, point.data(), m - 1, x.data());
    }
    batch_log[b] = log_mean_exp(w);
  });

  EstimateResult r;
  r.method = method;
  r.m = m;
  r.d = fp.d();
  r.n_total = per_batch * kBatchCount;
  r.seed = seed;
  r.batch_log_estimates = batch_log;
  r.log_estimate = log_mean_exp(batch_log);
  if (r.log_estimate == -kInf) {
    r.rel_error = std::numeric_limits<double>::infinity();
  } else {
    double ss = 0.0;
    for (const double lb : batch_log) {
      const double dev = std::expm1(lb - r.log_estimate);
      ss += dev * dev;
    }
    r.rel_error = std::sqrt(ss) / static_cast<double>(kBatchCount);
  }
  if (tilt.x_star.size() == m) r.log_upper_bound = tilt.psi_star;
  if (log_lower) {
    r.log_lower_bound = *log_lower;
    if (r.log_upper_bound) {
      r.worst_case_rel_error = std::expm1(*r.log_upper_bound - *log_lower) /
                               std::sqrt(static_cast<double>(r.n_total));
    }
  }
  r.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::uint64_t hoeffding_n(double psi_star, double log_lower, double eps, double alpha) {
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (log_lower > psi_star) throw InvalidArgument("lower bound exceeds the upper bound");
  // log of (exp(psi*) - l_L) / eps, with l_L = 0 allowed as log_lower = -inf.
  const double log_gap = log_lower == -kInf ? psi_star : psi_star + log1m_exp(log_lower - psi_star);
  if (log_gap == -kInf) return 1;
  const double log_n = std::log(-std::log(alpha / 2.0)) + 2.0 * (log_gap - std::log(eps)) -
                       std::log(2.0);
  if (log_n >= 63.0 * std::log(2.0)) {
    throw Overflow("Hoeffding sample size exp(" + std::to_string(log_n) + ") is not representable");
  }
  const double n = std::ceil(std::exp(log_n));
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(n));
}

}  // namespace tmvn
