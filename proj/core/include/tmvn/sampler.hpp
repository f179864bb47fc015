#pragma once

// Exact accept-reject sampling from N(0, I_d) restricted to
// {l <= A z <= u}, using the tilted sequential proposal and the envelope
// constant exp(psi*).

#include <cstdint>

#include "tmvn/problem.hpp"
#include "tmvn/tilting.hpp"

namespace tmvn {

struct SampleBatch {
  Matrix samples;  // one draw per row
  std::uint64_t proposals_used = 0;
  double acceptance_rate = 0.0;
  double log_envelope = 0.0;  // psi* of the tilt used
  std::uint64_t seed = 0;
  double wall_time_ms = 0.0;
};

struct SamplerOptions {
  std::uint64_t max_proposals = 100'000'000;
  unsigned threads = 0;  // 0 = hardware concurrency
  /// Proposals per substream; results do not depend on the thread count
  /// but do depend on this value.
  Index chunk_size = 1024;
};

/// Draws n rows z in R^d. For a covariance-form problem the rows are the
/// standard coordinates of the permuted Cholesky factorization; use
/// sample_covariance_form to get draws of X itself.
SampleBatch sample(const FactoredProblem& fp, const TiltingSolution& tilt, Index n,
                   std::uint64_t seed, const SamplerOptions& options = {});

/// Draws of the constrained vector in the problem's own coordinates: X with
/// X ~ N(0, sigma) for covariance input, A z for constraint input. Runs
/// factorization and tilting internally.
SampleBatch sample_covariance_form(const TruncationProblem& problem, Index n, std::uint64_t seed,
                                   bool reorder = true, const SamplerOptions& options = {});

/// Draws z in the original coordinates of a constraint-form problem (or
/// permuted standard coordinates for covariance input), with factorization
/// and tilting done internally.
SampleBatch sample_problem(const TruncationProblem& problem, Index n, std::uint64_t seed,
                           bool reorder = true, const SamplerOptions& options = {});

}  // namespace tmvn
