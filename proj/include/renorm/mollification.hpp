#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "renorm/profile.hpp"
#include "renorm/rate_fit.hpp"
#include "renorm/spectral.hpp"

namespace renorm {

/// Periodized rescaled bump eta^eps sampled on a grid, together with its
/// (real, even) Fourier coefficients.
class Mollifier {
 public:
  [[nodiscard]] const Grid& grid() const noexcept { return samples_.grid(); }
  [[nodiscard]] double epsilon() const noexcept { return epsilon_; }
  /// Kernel samples, normalized so the rectangle-rule mass is one.
  [[nodiscard]] const ScalarField& samples() const noexcept { return samples_; }
  [[nodiscard]] std::span<const double> spectrum() const noexcept { return hat_; }
  /// Plateau level c of the sampled kernel (value on |x| <= eps/2).
  [[nodiscard]] double plateau() const noexcept { return plateau_; }

  friend Mollifier build_mollifier(const Grid& grid, double epsilon);

 private:
  ScalarField samples_;
  std::vector<double> hat_;
  double epsilon_ = 0.0;
  double plateau_ = 0.0;
};

/// Euclidean minimum-image distance of a grid point from the origin.
inline double periodic_radius(const Grid& g, std::size_t flat) {
  double r2 = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const double x = g.coordinate(flat, a);
    const double d = std::min(x, 1.0 - x);
    r2 += d * d;
  }
  return std::sqrt(r2);
}

inline Mollifier build_mollifier(const Grid& grid, double epsilon) {
  if (!(epsilon >= 4.0 * grid.spacing() * (1.0 - 1e-12))) {
    throw ResolutionError("mollifier scale " + std::to_string(epsilon) + " below 4h = " +
                          std::to_string(4.0 * grid.spacing()));
  }
  if (epsilon >= 0.5) throw DomainWrapError("mollifier scale must be < 1/2, got " + std::to_string(epsilon));
  Mollifier m;
  m.epsilon_ = epsilon;
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = plateau_cutoff(periodic_radius(grid, i) / epsilon);
  const double mass = integrate(v);
  for (auto& x : v) x /= mass;
  m.plateau_ = 1.0 / mass;
  m.samples_ = ScalarField(grid, std::move(v), false);
  const auto s = transform(m.samples_);
  m.hat_.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) m.hat_[i] = s[i].real();
  m.hat_[0] = 1.0;
  return m;
}

inline Spectrum mollify(Spectrum s, const Mollifier& m) {
  require_same_grid(s.grid(), m.grid(), "mollify");
  const auto h = m.spectrum();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= h[i];
  return s;
}

inline ScalarField mollify(const ScalarField& f, const Mollifier& m) {
  require_same_grid(f.grid(), m.grid(), "mollify");
  return inverse(mollify(transform(f), m), f.homogeneous());
}

inline VectorField mollify(const VectorField& u, const Mollifier& m) {
  std::vector<ScalarField> out;
  for (const auto& c : u.components()) out.push_back(mollify(c, m));
  return VectorField(std::move(out));
}

/// eps_k = 2^{-k} for k in [kmin, kmax], keeping only scales with eps >= 4h.
inline std::vector<double> default_eps_sweep(const Grid& grid, int kmin = 3, int kmax = 9) {
  std::vector<double> e;
  for (int k = kmin; k <= kmax; ++k) {
    const double eps = std::ldexp(1.0, -k);
    if (eps >= 4.0 * grid.spacing()) e.push_back(eps);
  }
  return e;
}

inline void check_sweep(std::span<const double> eps) {
  if (eps.size() < 5) throw ArgumentError("epsilon sweep needs at least 5 values");
  const auto [lo, hi] = std::minmax_element(eps.begin(), eps.end());
  if (*hi < 4.0 * *lo * (1.0 - 1e-12)) throw ArgumentError("epsilon sweep must span at least two octaves");
}

/// Slope of log ||f^eps - f||_p against log eps. For a field of Besov
/// regularity alpha the slope estimates alpha; it saturates at 2 for smooth
/// fields since the kernel is even.
inline RateFit smoothing_rate(const ScalarField& f, double p, std::span<const double> eps_list) {
  check_exponent(p);
  check_sweep(eps_list);
  const auto s = transform(f);
  std::vector<double> vals;
  for (double eps : eps_list) {
    auto diff = mollify(s, build_mollifier(f.grid(), eps)) - s;
    vals.push_back(lp_norm(inverse(diff), p));
  }
  return fit_rate(eps_list, vals);
}

/// Exponent alpha - d(s-2)/(p(s-1)) - 1 bounding the gradient growth.
inline double gradient_blowup_exponent(double alpha, int d, double p, double s) {
  return alpha - d * (s - 2.0) / (p * (s - 1.0)) - 1.0;
}

/// Slope of log ||grad f^eps||_{L^{p(s-1)}} against log eps.
inline RateFit gradient_blowup_rate(const ScalarField& f, double p, double s, std::span<const double> eps_list) {
  if (!(s >= 2.0)) throw ArgumentError("gradient_blowup_rate: s must be >= 2");
  const double q = p * (s - 1.0);
  check_exponent(q);
  check_sweep(eps_list);
  const auto sf = transform(f);
  std::vector<double> vals;
  for (double eps : eps_list) {
    vals.push_back(lp_norm(gradient(mollify(sf, build_mollifier(f.grid(), eps))), q));
  }
  return fit_rate(eps_list, vals);
}

/// Exponent -d(s-2)/p bounding || |f^eps|^{s-1} ||_p.
inline double lemma_l1_exponent(int d, double p, double s) { return -d * (s - 2.0) / p; }

/// Slope of log || |f^eps|^{s-1} ||_p against log eps; requires p >= s-1 >= 1.
inline RateFit lemma_l1_check(const ScalarField& f, double p, double s, std::span<const double> eps_list) {
  if (!(s - 1.0 >= 1.0) || !(p >= s - 1.0)) {
    throw PreconditionError("lemma_l1_check requires p >= s - 1 >= 1 (p = " + std::to_string(p) +
                            ", s = " + std::to_string(s) + ")");
  }
  check_sweep(eps_list);
  const auto sf = transform(f);
  std::vector<double> vals;
  for (double eps : eps_list) {
    auto fe = inverse(mollify(sf, build_mollifier(f.grid(), eps)));
    for (auto& v : fe.values()) v = std::pow(std::abs(v), s - 1.0);
    vals.push_back(lp_norm(fe, p));
  }
  return fit_rate(eps_list, vals);
}

}  // namespace renorm
