#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace loire::bench {

/// Seeded generator with a fully specified output sequence.
///
/// Engine: std::mt19937_64 (its sequence is fixed by the C++ standard).
/// uniform(): (next >> 11) * 2^-53, in [0, 1).
/// normal(): Box-Muller on two uniform() draws, u1 mapped to (0, 1].
///
/// The standard <random> distributions are avoided because their algorithms
/// are implementation-defined, which would make instances differ between
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, n) by rejection, n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace loire::bench
