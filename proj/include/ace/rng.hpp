#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ace {

/// SplitMix64 finalizer; a bijective mix of a 64-bit word.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent sub-stream seed from a root seed, a stream name and
/// a counter. Streams with different names never share state, so adding a
/// stream leaves every existing stream untouched.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t counter = 0);

/// Seeded pseudo-random stream. Deterministic for a given seed on a given
/// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal draw.
  double normal() { return normal_(engine_); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ace
