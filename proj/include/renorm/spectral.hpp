#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "renorm/fft.hpp"
#include "renorm/field.hpp"

namespace renorm {

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Normalized forward transform.
inline Spectrum transform(const ScalarField& f) {
  const auto& g = f.grid();
  std::vector<Complex> c(f.values().begin(), f.values().end());
  detail::fft_inplace(g, c, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(g.size());
  for (auto& v : c) v *= scale;
  return {g, std::move(c)};
}

/// Inverse transform keeping complex samples (used for reality diagnostics).
inline std::vector<Complex> inverse_complex(const Spectrum& s) {
  std::vector<Complex> c(s.coeffs().begin(), s.coeffs().end());
  detail::fft_inplace(s.grid(), c, FFTW_BACKWARD);
  return c;
}

/// Inverse transform; the imaginary part (roundoff for Hermitian input) is dropped.
inline ScalarField inverse(const Spectrum& s, bool homogeneous = false) {
  auto c = inverse_complex(s);
  std::vector<double> v(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) v[i] = c[i].real();
  return {s.grid(), std::move(v), homogeneous};
}

/// Largest deviation from f_hat(-xi) = conj(f_hat(xi)).
inline double hermitian_defect(const Spectrum& s) {
  const auto& g = s.grid();
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto xi = g.wavevector(i);
    Wavevector neg{-xi[0], -xi[1]};
    for (auto& k : neg)
      if (k == g.n() / 2) k = -g.n() / 2;
    d = std::max(d, std::abs(s[i] - std::conj(s.at(neg))));
  }
  return d;
}

inline void check_axis(const Grid& g, int axis) {
  if (axis < 0 || axis >= g.dim()) {
    throw ArgumentError("axis " + std::to_string(axis) + " out of range for a " + std::to_string(g.dim()) +
                        "-dimensional grid");
  }
}

/// Multiplies by 2 pi i xi_axis; the Nyquist coefficient along `axis` is zeroed
/// so real fields stay real.
inline Spectrum derivative(Spectrum s, int axis) {
  const auto& g = s.grid();
  check_axis(g, axis);
  const int nyq = -g.n() / 2;
  s.apply([&](const Wavevector& xi) {
    const int k = xi[static_cast<std::size_t>(axis)];
    return k == nyq ? Complex{} : Complex{0.0, two_pi * k};
  });
  return s;
}

inline ScalarField spectral_derivative(const ScalarField& f, int axis) {
  check_axis(f.grid(), axis);
  return inverse(derivative(transform(f), axis), true);
}

inline VectorField gradient(const Spectrum& s) {
  std::vector<ScalarField> comps;
  for (int a = 0; a < s.grid().dim(); ++a) comps.push_back(inverse(derivative(s, a), true));
  return VectorField(std::move(comps));
}

inline VectorField gradient(const ScalarField& f) { return gradient(transform(f)); }

/// Spectral divergence of a vector field.
inline ScalarField divergence(const VectorField& u) {
  const auto& g = u.grid();
  if (u.size() != static_cast<std::size_t>(g.dim())) throw ArgumentError("divergence: component count != dim");
  auto acc = Spectrum::zeros(g);
  for (int a = 0; a < g.dim(); ++a) acc += derivative(transform(u[static_cast<std::size_t>(a)]), a);
  return inverse(acc, true);
}

/// max over xi != 0 off the Nyquist lines of |xi . u_hat(xi)| / (|xi| max |u_hat|),
/// 0 for the zero field.
inline double divergence_defect(const VectorField& u) {
  const auto& g = u.grid();
  std::vector<Spectrum> s;
  double umax = 0.0;
  for (const auto& c : u.components()) {
    s.push_back(transform(c));
    for (auto v : s.back().coeffs()) umax = std::max(umax, std::abs(v));
  }
  if (umax == 0.0) return 0.0;
  double d = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto xi = g.wavevector(i);
    if (i == 0 || g.is_nyquist(xi)) continue;
    Complex acc{};
    for (std::size_t a = 0; a < s.size(); ++a) acc += static_cast<double>(xi[a]) * s[a][i];
    d = std::max(d, std::abs(acc) / Grid::norm(xi));
  }
  return d / umax;
}

inline bool divergence_free(const VectorField& u, double tol = 1e-12) { return divergence_defect(u) <= tol; }

inline void check_exponent(double p) {
  if (!(p >= 1.0)) throw ArgumentError("L^p exponent must satisfy p >= 1 (or infinity), got " + std::to_string(p));
}

/// Rectangle-rule integral over the unit torus.
inline double integrate(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double mean(const ScalarField& f) { return integrate(f.values()); }

namespace detail {
template <class Magnitude>
double lp_from_magnitudes(std::size_t count, double p, Magnitude&& mag) {
  check_exponent(p);
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < count; ++i) m = std::max(m, mag(i));
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < count; ++i) s += std::pow(mag(i), p);
  return std::pow(s / static_cast<double>(count), 1.0 / p);
}
}  // namespace detail

/// (integral of |f|^p)^{1/p} with respect to the normalized measure; p = infinity gives max |f|.
inline double lp_norm(const ScalarField& f, double p) {
  const auto v = f.values();
  return detail::lp_from_magnitudes(v.size(), p, [&](std::size_t i) { return std::abs(v[i]); });
}

/// L^p norm of the pointwise Euclidean magnitude.
inline double lp_norm(const VectorField& u, double p) {
  const std::size_t count = u.grid().size();
  return detail::lp_from_magnitudes(count, p, [&](std::size_t i) {
    double s = 0.0;
    for (const auto& c : u.components()) s += c[i] * c[i];
    return std::sqrt(s);
  });
}

/// Exact translation by a grid vector: result(x) = f(x + shift * h).
inline ScalarField roll(const ScalarField& f, const Wavevector& shift) {
  const auto& g = f.grid();
  const int n = g.n();
  auto wrap = [n](int i) { return ((i % n) + n) % n; };
  std::vector<double> v(f.size());
  if (g.dim() == 1) {
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(wrap(i + shift[0]))];
  } else {
    for (int i = 0; i < n; ++i) {
      const int si = wrap(i + shift[0]);
      for (int j = 0; j < n; ++j) {
        v[static_cast<std::size_t>(i) * n + j] = f[static_cast<std::size_t>(si) * n + wrap(j + shift[1])];
      }
    }
  }
  return {g, std::move(v), f.homogeneous()};
}

/// Band-limited interpolation onto a grid with twice the resolution.
/// The Nyquist coefficient is split symmetrically so real data stays real.
inline ScalarField refine(const ScalarField& f) {
  const auto& g = f.grid();
  const Grid fine(g.dim(), 2 * g.n());
  const auto s = transform(f);
  auto t = Spectrum::zeros(fine);
  const int nyq = -g.n() / 2;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto xi = g.wavevector(i);
    const int copies0 = xi[0] == nyq ? 2 : 1;
    const int copies1 = (g.dim() == 2 && xi[1] == nyq) ? 2 : 1;
    const double w = 1.0 / (copies0 * copies1);
    for (int a = 0; a < copies0; ++a) {
      for (int b = 0; b < copies1; ++b) {
        Wavevector target{a == 1 ? -xi[0] : xi[0], b == 1 ? -xi[1] : xi[1]};
        t[fine.index_of(target)] += w * s[i];
      }
    }
  }
  return inverse(t, f.homogeneous());
}

}  // namespace renorm
