#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qform {

/// Seeded random source used everywhere randomness is needed.
///
/// All derived quantities (indices, reals, normals) are computed here from
/// the raw 64-bit stream rather than through <random> distributions, so a
/// given seed reproduces the same draws on every standard library.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/splitmix64";

  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Uniform real in [0, 1) with 53 bits of resolution.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via Box-Muller.
  double normal();

  /// Independent child stream; the same (seed, stream) always gives the
  /// same child regardless of how much the parent has been consumed.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace qform
