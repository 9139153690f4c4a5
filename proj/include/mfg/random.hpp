#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace mfg {

/// Seedable random source used by every stochastic operation.
///
/// Draws are built directly from the 64-bit engine output (no
/// std::*_distribution), so a given seed produces the same stream on every
/// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Index drawn by inverse CDF from a probability vector. Mass lost to
  /// rounding at the tail is assigned to the last index with positive mass.
  std::size_t categorical(std::span<const double> probs);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t value);

/// Deterministic sub-stream keyed by a path of integers, e.g.
/// make_stream(seed, {outer_iteration, stage}). Distinct paths give
/// statistically independent streams; the same path always gives the same one.
Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

}  // namespace mfg
