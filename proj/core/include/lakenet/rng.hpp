#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace lakenet {

/// Deterministic random source.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the standard, and
/// derives uniform, bounded-integer and normal variates with explicit formulas
/// so results do not depend on the standard library's distribution classes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n) by rejection sampling; n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (one variate per call).
  double normal();

  /// Derives an independent child seed from this stream.
  std::uint64_t fork_seed() { return next() ^ 0x9e3779b97f4a7c15ULL; }

 private:
  std::mt19937_64 engine_;
};

/// Mixes a base seed and a stream index into a well-spread child seed
/// (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Fisher-Yates permutation of {0, ..., n-1} driven by Rng(seed).
std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed);

}  // namespace lakenet
