#pragma once

#include <cmath>

namespace renorm {

/// C-infinity radial cutoff: 1 on r <= 1/2, 0 on r >= 1, built from exp(-1/t)
/// blended as g(1-t) / (g(1-t) + g(t)) with t = 2r - 1.
inline double plateau_cutoff(double r) noexcept {
  if (r <= 0.5) return 1.0;
  if (r >= 1.0) return 0.0;
  const double t = 2.0 * r - 1.0;
  const double a = std::exp(-1.0 / (1.0 - t));
  const double b = std::exp(-1.0 / t);
  return a / (a + b);
}

}  // namespace renorm
