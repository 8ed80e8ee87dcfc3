#pragma once

#include <cstdint>
#include <limits>

namespace heartcast {

/// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for draw `index` of stream `stream` under a run seed. Draws are keyed
/// by counter so results never depend on how work is split across threads.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t index = 0) noexcept;

/// Small counter-seeded generator (xoshiro256**). Satisfies
/// UniformRandomBitGenerator, but the distributions below are our own so
/// output is identical across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform in [0, 1).
  double uniform() noexcept;
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Marsaglia polar method, no cached spare).
  double normal() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

 private:
  std::uint64_t s_[4];
};

}  // namespace heartcast
