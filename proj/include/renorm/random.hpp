#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace renorm {

/// Seeded generator with platform-independent uniform and normal draws
/// (the standard distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double phase() { return uniform(0.0, 2.0 * std::numbers::pi); }

  /// Box-Muller.
  double normal() {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace renorm
