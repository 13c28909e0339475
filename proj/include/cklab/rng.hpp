#pragma once

#include <cstdint>
#include <random>

namespace cklab {

/// Seeded random source used by test suites and the CLI.
///
/// Every draw goes through the integer engine and is scaled explicitly, so a
/// given seed produces the same stream on every platform (the distribution
/// classes of the standard library are not portable, mt19937_64 is).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Symmetric uniform in (-a, a).
  double symmetric(double a) { return uniform(-a, a); }

  /// Marsaglia polar method on top of uniform(); portable normal deviates.
  double normal() {
    for (;;) {
      const double x = uniform(-1.0, 1.0);
      const double y = uniform(-1.0, 1.0);
      const double s = x * x + y * y;
      if (s > 0.0 && s < 1.0) {
        return x * std::sqrt(-2.0 * std::log(s) / s);
      }
    }
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cklab
