#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <vector>

#include "renorm/errors.hpp"

namespace renorm {

/// Least-squares fit of log(value) against log(epsilon).
struct RateFit {
  std::vector<double> epsilon;
  std::vector<double> value;
  std::vector<double> log_eps;
  std::vector<double> log_value;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  /// Fewer than two values above the noise floor; slope and intercept are 0.
  bool degenerate = false;
};

inline constexpr double rate_floor = 1e-14;

/// Points with value <= rate_floor are kept in the table but excluded from the fit.
inline RateFit fit_rate(std::span<const double> eps, std::span<const double> values) {
  if (eps.size() != values.size()) throw ArgumentError("fit_rate: length mismatch");
  RateFit fit;
  fit.epsilon.assign(eps.begin(), eps.end());
  fit.value.assign(values.begin(), values.end());
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    fit.log_eps.push_back(std::log(eps[i]));
    const double v = std::abs(values[i]);
    fit.log_value.push_back(v > 0.0 ? std::log(v) : -INFINITY);
    if (v > rate_floor && std::isfinite(v)) {
      xs.push_back(fit.log_eps.back());
      ys.push_back(fit.log_value.back());
    }
  }
  if (xs.size() < 2) {
    fit.degenerate = true;
    return fit;
  }
  const double m = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  // A perfectly flat series is a perfect fit.
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

/// CSV rows `epsilon,value,log_eps,log_value` plus a footer `slope,intercept,r_squared`.
inline void write_csv(std::ostream& os, const RateFit& fit) {
  char buf[160];
  os << "epsilon,value,log_eps,log_value\n";
  for (std::size_t i = 0; i < fit.epsilon.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", fit.epsilon[i], fit.value[i], fit.log_eps[i],
                  fit.log_value[i]);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "slope,intercept,r_squared\n%.17g,%.17g,%.17g\n", fit.slope, fit.intercept,
                fit.r_squared);
  os << buf;
}

}  // namespace renorm
