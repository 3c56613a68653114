#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace anoma {

/// Seeded generator with portable conversions. The engine is mt19937_64, whose
/// output sequence is fixed by the standard; the real and integer conversions
/// below are written out so results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n); rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (second variate cached).
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Labeled per-stage seed: mixes `seed` with a hash of `label` so adding a new
/// stage never perturbs the stream of an existing one.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

std::uint64_t fnv1a64(std::string_view text);
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace anoma
