#include "tmvn/qmc.hpp"

#include <cmath>
#include <string>

#include "tmvn/error.hpp"
#include "tmvn/rng.hpp"

namespace tmvn {

std::vector<std::uint64_t> first_primes(std::size_t count) {
  std::vector<std::uint64_t> primes;
  if (count == 0) return primes;
  // p_n < n (log n + log log n) for n >= 6.
  const double n = static_cast<double>(std::max<std::size_t>(count, 6));
  const auto limit = static_cast<std::size_t>(n * (std::log(n) + std::log(std::log(n)))) + 16;
  std::vector<bool> composite(limit + 1, false);
  for (std::size_t i = 2; i <= limit && primes.size() < count; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (std::size_t j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return primes;
}

Index effective_dimension(Index d) {
  return static_cast<Index>(std::ceil(5.0 * static_cast<double>(d) *
                                      std::log(static_cast<double>(d) + 1.0) / 4.0));
}

QmcStream::QmcStream(Index dims, Index n, std::uint64_t seed) : seed_(seed) {
  if (n < kBatchCount) {
    throw InvalidArgument("need at least " + std::to_string(kBatchCount) + " points, got " +
                          std::to_string(n));
  }
  if (dims < 0) throw InvalidArgument("negative QMC dimension");
  points_per_batch_ = (n + kBatchCount - 1) / kBatchCount;
  const auto primes = first_primes(static_cast<std::size_t>(dims));
  for (const auto p : primes) {
    const double r = std::sqrt(static_cast<double>(p));
    root_frac_.push_back(r - std::floor(r));
  }
  shifts_.resize(dims, kBatchCount);
  RandomStream rng(seed, 0);
  for (Index b = 0; b < kBatchCount; ++b) {
    for (Index j = 0; j < dims; ++j) shifts_(j, b) = rng.uniform();
  }
}

void QmcStream::point(Index batch, Index k, double* out) const {
  const double kd = static_cast<double>(k);
  for (Index j = 0; j < dims(); ++j) {
    // k * frac(sqrt p) has the same fractional part as k * sqrt p and keeps
    // more low-order bits.
    double v = kd * root_frac_[static_cast<std::size_t>(j)] + shifts_(j, batch);
    v -= std::floor(v);
    out[j] = std::fabs(2.0 * v - 1.0);
  }
}

Matrix QmcStream::batch(Index b) const {
  Matrix pts(dims(), points_per_batch_);
  for (Index k = 0; k < points_per_batch_; ++k) point(b, k + 1, pts.col(k).data());
  return pts;
}

std::vector<Matrix> qmc_batches(Index d, Index n, std::uint64_t seed) {
  if (d < 1) throw InvalidArgument("dimension must be positive");
  const QmcStream stream(d - 1, n, seed);
  std::vector<Matrix> out;
  out.reserve(kBatchCount);
  for (Index b = 0; b < kBatchCount; ++b) out.push_back(stream.batch(b));
  return out;
}

}  // namespace tmvn
