#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace hmfmd {

/// Counter-based random stream (SplitMix64 over seed + counter).
///
/// Every draw is a pure function of (seed, counter), so sequences are
/// identical on every platform and streams are cheap to fork. Floating-point
/// conversions are done here rather than through <random> distributions,
/// whose output is implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (one value per two uniforms).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  /// Unbiased integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Independent child stream keyed by a tag and an optional index.
  RngStream derive(std::string_view tag, std::uint64_t index = 0) const;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed for a child stream: mixes the parent seed with a tag hash and index.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0);

}  // namespace hmfmd
