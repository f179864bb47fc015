#include "tmvn/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

#include "parallel.hpp"
#include "tmvn/error.hpp"
#include "tmvn/estimator.hpp"
#include "tmvn/rng.hpp"
#include "tmvn/special_fn.hpp"

namespace tmvn {
namespace {

constexpr double kEnvelopeSlack = 1e-9;

struct ChunkResult {
  std::vector<double> rows;            // accepted draws, d values each
  std::vector<std::uint64_t> offsets;  // proposal index of each acceptance
  double worst_excess = -kInf;         // max psi(X) - psi*
};

ChunkResult run_chunk(const FactoredProblem& fp, const TiltingSolution& tilt, std::uint64_t seed,
                      std::uint64_t chunk, Index proposals) {
  const Index m = fp.m();
  const Index d = fp.d();
  RandomStream rng(seed, chunk);
  std::vector<double> u(static_cast<std::size_t>(m));
  std::vector<double> x(static_cast<std::size_t>(m));
  ChunkResult out;
  for (Index i = 0; i < proposals; ++i) {
    for (auto& v : u) v = rng.uniform();
    const double log_w = sov_path(fp, tilt.mu_star, u.data(), m, x.data());
    const double excess = log_w - tilt.psi_star;
    out.worst_excess = std::max(out.worst_excess, excess);
    if (excess > kEnvelopeSlack) return out;
    if (std::log(rng.uniform()) > excess) continue;
    out.offsets.push_back(static_cast<std::uint64_t>(i));
    out.rows.insert(out.rows.end(), x.begin(), x.end());
    for (Index j = m; j < d; ++j) out.rows.push_back(rng.normal());
  }
  return out;
}

}  // namespace

SampleBatch sample(const FactoredProblem& fp, const TiltingSolution& tilt, Index n,
                   std::uint64_t seed, const SamplerOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (n < 1) throw InvalidArgument("sample count must be positive");
  if (tilt.mu_star.size() != fp.m()) throw InvalidArgument("tilt does not match the problem");
  if (!(tilt.kkt_residual <= 1e-8)) {
    throw InvalidArgument("tilt is not certified (KKT residual " +
                          std::to_string(tilt.kkt_residual) + ")");
  }
  if (options.chunk_size < 1) throw InvalidArgument("chunk size must be positive");
  const Index d = fp.d();
  const auto chunk = static_cast<std::uint64_t>(options.chunk_size);
  const unsigned threads = resolve_threads(options.threads, 1u << 16);

  std::vector<double> rows;
  rows.reserve(static_cast<std::size_t>(n * d));
  Index accepted = 0;
  std::uint64_t proposals = 0;
  std::uint64_t next_chunk = 0;
  while (accepted < n) {
    if (proposals >= options.max_proposals) {
      std::ostringstream os;
      os << "accepted " << accepted << " of " << n << " draws after " << proposals
         << " proposals (envelope log c = " << tilt.psi_star << ")";
      throw BudgetExceeded(os.str());
    }
    std::vector<ChunkResult> round(threads);
    detail::parallel_for(threads, threads, [&](std::size_t t) {
      round[t] = run_chunk(fp, tilt, seed, next_chunk + t, options.chunk_size);
    });
    next_chunk += threads;
    for (auto& r : round) {
      if (r.worst_excess > kEnvelopeSlack) {
        std::ostringstream os;
        os.precision(17);
        os << "proposal weight exceeds the envelope by " << r.worst_excess;
        throw EnvelopeViolation(os.str());
      }
      const Index here = static_cast<Index>(r.offsets.size());
      const Index take = std::min(here, n - accepted);
      rows.insert(rows.end(), r.rows.begin(), r.rows.begin() + take * d);
      accepted += take;
      if (accepted == n) {
        proposals += r.offsets[static_cast<std::size_t>(take - 1)] + 1;
        break;
      }
      proposals += chunk;
      if (proposals >= options.max_proposals) break;
    }
  }

  // rows holds [x; w] per draw; z = Q [x; w].
  Matrix xw = Eigen::Map<const Matrix>(rows.data(), d, n);
  SampleBatch batch;
  if (fp.Q().isIdentity(0.0)) {
    batch.samples = xw.transpose();
  } else {
    batch.samples = (fp.Q() * xw).transpose();
  }
  batch.proposals_used = proposals;
  batch.acceptance_rate = static_cast<double>(n) / static_cast<double>(proposals);
  batch.log_envelope = tilt.psi_star;
  batch.seed = seed;
  batch.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return batch;
}

SampleBatch sample_problem(const TruncationProblem& problem, Index n, std::uint64_t seed,
                           bool reorder, const SamplerOptions& options) {
  const FactoredProblem fp = factorize(problem, reorder);
  const TiltingSolution tilt = solve_tilting(fp);
  return sample(fp, tilt, n, seed, options);
}

SampleBatch sample_covariance_form(const TruncationProblem& problem, Index n, std::uint64_t seed,
                                   bool reorder, const SamplerOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const FactoredProblem fp = factorize(problem, reorder);
  const TiltingSolution tilt = solve_tilting(fp);
  SampleBatch batch = sample(fp, tilt, n, seed, options);
  if (problem.covariance_input()) {
    // Permuted X is L z; undo the permutation column by column.
    const Matrix y = batch.samples * fp.L().transpose();
    Matrix x(y.rows(), y.cols());
    for (Index k = 0; k < fp.m(); ++k) x.col(fp.permutation()[static_cast<std::size_t>(k)]) = y.col(k);
    batch.samples = std::move(x);
  } else {
    batch.samples = batch.samples * problem.matrix().transpose();
  }
  batch.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return batch;
}

}  // namespace tmvn
