#pragma once

// Randomly shifted Richtmyer lattice: coordinate j of point k in batch b is
// |2 * frac(k * sqrt(p_j) + U_bj) - 1| with p_j the j-th prime.

#include <cstdint>
#include <vector>

#include "tmvn/problem.hpp"

namespace tmvn {

inline constexpr Index kBatchCount = 12;

/// First `count` primes by sieve.
std::vector<std::uint64_t> first_primes(std::size_t count);

/// ceil(5 d log(d + 1) / 4), the number of primes nominally drawn for a
/// d-dimensional problem.
Index effective_dimension(Index d);

class QmcStream {
 public:
  /// dims coordinates per point, ceil(n / 12) points per batch.
  QmcStream(Index dims, Index n, std::uint64_t seed);

  Index dims() const noexcept { return static_cast<Index>(root_frac_.size()); }
  Index points_per_batch() const noexcept { return points_per_batch_; }
  Index batch_count() const noexcept { return kBatchCount; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// Shift U for (batch, coordinate).
  double shift(Index batch, Index coord) const { return shifts_(coord, batch); }

  /// Writes point k (1-based) of `batch` into out[0 .. dims).
  void point(Index batch, Index k, double* out) const;

  /// dims x points_per_batch, one point per column.
  Matrix batch(Index b) const;

 private:
  std::vector<double> root_frac_;  // frac(sqrt(p_j))
  Matrix shifts_;
  Index points_per_batch_;
  std::uint64_t seed_;
};

/// The 12 batches over [0,1]^{d-1} for a d-dimensional problem with n points.
std::vector<Matrix> qmc_batches(Index d, Index n, std::uint64_t seed);

}  // namespace tmvn
