#pragma once

// Seeding for reproducible, splittable pseudo-random streams: a 64-bit seed
// plus a substream index map through SplitMix64 to an independent engine.

#include <cstdint>
#include <random>

namespace tmvn {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t substream)
      : engine_(splitmix64(splitmix64(seed) ^ splitmix64(substream + 0x632be59bd9b4e019ULL))) {}

  /// Uniform on the open interval (0, 1): 53 random bits, offset by half a
  /// step so neither endpoint is reachable.
  double uniform() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_(engine_); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace tmvn
