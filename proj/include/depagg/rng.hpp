#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace depagg {

/// SplitMix64 finalizer. Used to expand one 64-bit seed into independent
/// streams; `derive_seed(seed, {a, b})` is a pure function of its inputs.
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> tags) noexcept;

/// xoshiro256++ with seed expansion through SplitMix64.
///
/// All distributions below are implemented here rather than through
/// <random>'s distribution objects, whose output is implementation-defined.
/// Given the same seed, every draw is bit-identical across platforms.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept;

  /// Child generator for stream `tag`; does not advance this generator.
  [[nodiscard]] Rng split(std::uint64_t tag) const noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept;
  /// Uniform integer in [0, n); n > 0. Lemire's nearly-divisionless method.
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t seed_ = 0;
};

}  // namespace depagg
