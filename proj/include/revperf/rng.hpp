#pragma once

#include <cstdint>
#include <limits>

namespace revperf {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based 64-bit generator ("SplitMix64 in counter mode").
///
/// Output i of a stream with key k is mix64(k + (i + 1) * 0x9E3779B97F4A7C15).
/// Stream j of a generator keyed k has key mix64(k ^ mix64(j + 0xD1B54A32D192ED03)),
/// so derived streams depend only on (master seed, index path) and never on
/// how many values the parent has produced. All distributions below are
/// implemented here rather than taken from <random>, whose distribution
/// algorithms are implementation-defined.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
  }

  /// Independent child stream `index`.
  Rng stream(std::uint64_t index) const noexcept {
    Rng child{KeyTag{}, mix64(key_ ^ mix64(index + kStreamSalt))};
    return child;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return counter_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform on the open interval (0, 1); safe to feed to quantile functions.
  double open_uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal by the Marsaglia polar method (uses one cached deviate).
  double normal() noexcept;

  double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Binomial(n, p) by sequential inversion of the pmf; O(n p) expected work.
  std::uint64_t binomial(std::uint64_t n, double p) noexcept;

  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  struct KeyTag {};
  Rng(KeyTag, std::uint64_t key) noexcept : key_(key) {}

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace revperf
