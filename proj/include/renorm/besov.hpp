#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "renorm/littlewood_paley.hpp"
#include "renorm/random.hpp"
#include "renorm/rate_fit.hpp"
#include "renorm/spectral.hpp"

namespace renorm {

namespace detail {
/// a cos(2 pi xi.x + phase) added to `v`, with xi.x reduced mod n in integers.
inline void add_mode(const Grid& g, std::vector<double>& v, const Wavevector& xi, double amplitude, double phase) {
  const long n = g.n();
  for (std::size_t i = 0; i < v.size(); ++i) {
    long m = 0;
    if (g.dim() == 1) {
      m = static_cast<long>(i) * xi[0];
    } else {
      m = static_cast<long>(i / g.n()) * xi[0] + static_cast<long>(i % g.n()) * xi[1];
    }
    m = ((m % n) + n) % n;
    v[i] += amplitude * std::cos(two_pi * static_cast<double>(m) / static_cast<double>(n) + phase);
  }
}

inline void hermitian_fill(const Grid& g, Spectrum& s, const Wavevector& xi, Complex c) {
  s[g.index_of(xi)] = c;
  s[g.index_of({-xi[0], -xi[1]})] = std::conj(c);
}
}  // namespace detail

/// a cos(2 pi xi.x + phase).
inline ScalarField single_mode(const Grid& g, const Wavevector& xi, double amplitude = 1.0, double phase = 0.0) {
  std::vector<double> v(g.size(), 0.0);
  detail::add_mode(g, v, xi, amplitude, phase);
  return {g, std::move(v), xi[0] != 0 || xi[1] != 0};
}

/// Dyadic wavevectors of a lacunary field: 2^k along x in 1D; in 2D a random
/// direction of length 2^k rounded to the integer lattice, so |xi_k| lies in
/// [2^{k-1}, 2^{k+1}].
inline std::vector<Wavevector> lacunary_wavevectors(const Grid& g, int K, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Wavevector> out;
  for (int k = 0; k <= K; ++k) {
    const double r = std::ldexp(1.0, k);
    if (g.dim() == 1) {
      out.push_back({1 << k, 0});
      continue;
    }
    const double a = rng.phase();
    out.push_back({static_cast<int>(std::lround(r * std::cos(a))), static_cast<int>(std::lround(r * std::sin(a)))});
  }
  return out;
}

/// f(x) = sum_{k=0}^{K} 2^{-k alpha} cos(2 pi xi_k.x + psi_k) with seeded
/// directions and phases; mean-zero and of exact Besov regularity alpha.
inline ScalarField synth_lacunary(const Grid& g, double alpha, int K, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("synth_lacunary: alpha must lie in (0,1)");
  if (K < 0 || (1L << K) >= g.n() / 2) {
    throw ResolutionError("synth_lacunary: 2^K must be < n/2 (K = " + std::to_string(K) + ", n = " +
                          std::to_string(g.n()) + ")");
  }
  const auto dirs = lacunary_wavevectors(g, K, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<double> v(g.size(), 0.0);
  for (int k = 0; k <= K; ++k) detail::add_mode(g, v, dirs[static_cast<std::size_t>(k)], std::pow(2.0, -k * alpha), rng.phase());
  return {g, std::move(v), true};
}

/// Wavevector motif of the coherent lacunary field: per octave the modes
/// 2^k (1,0), 2^k (1,1) and their sum 2^k (2,1), which form a closed triad
/// with unequal lengths.
inline constexpr std::array<Wavevector, 3> coherent_motif{{{1, 0}, {1, 1}, {2, 1}}};

/// 2D lacunary field whose octaves are scaled copies of one triad motif with
/// seeded phases shared across octaves. Every octave carries amplitude
/// 2^{-k alpha}, so the field has Besov regularity alpha, and the triads make
/// the quadratic commutator flux nonzero and scale-coherent.
inline ScalarField synth_coherent_lacunary(const Grid& g, double alpha, int K, std::uint64_t seed) {
  if (g.dim() != 2) throw ArgumentError("synth_coherent_lacunary: requires a 2D grid");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("synth_coherent_lacunary: alpha must lie in (0,1)");
  if (K < 0 || (2L << K) >= g.n() / 2) {
    throw ResolutionError("synth_coherent_lacunary: 2^{K+1} must be < n/2");
  }
  Rng rng(seed);
  std::array<double, 3> phases{};
  for (auto& p : phases) p = rng.phase();
  std::vector<double> v(g.size(), 0.0);
  for (int k = 0; k <= K; ++k) {
    const double amp = std::pow(2.0, -k * alpha);
    for (std::size_t m = 0; m < coherent_motif.size(); ++m) {
      const Wavevector xi{coherent_motif[m][0] << k, coherent_motif[m][1] << k};
      detail::add_mode(g, v, xi, amp, phases[m]);
    }
  }
  return {g, std::move(v), true};
}

/// Random-phase field with |f_hat(xi)| = |xi|^{-decay} on every resolvable
/// nonzero mode below Nyquist.
inline ScalarField synth_rough_spectrum(const Grid& g, double decay, std::uint64_t seed) {
  Rng rng(seed);
  auto s = Spectrum::zeros(g);
  for (std::size_t i = 1; i < g.size(); ++i) {
    const auto xi = g.wavevector(i);
    if (g.is_nyquist(xi)) continue;
    // one representative per conjugate pair
    if (xi[0] < 0 || (xi[0] == 0 && xi[1] < 0)) continue;
    const double amp = std::pow(Grid::norm(xi), -decay);
    detail::hermitian_fill(g, s, xi, std::polar(amp, rng.phase()));
  }
  return inverse(s, true);
}

/// Band-limited random field on 0 < |xi| <= kmax with Gaussian coefficients,
/// scaled so that max |f| = amplitude.
inline ScalarField synth_smooth_random(const Grid& g, double kmax, double amplitude, std::uint64_t seed) {
  if (!(kmax >= 1.0) || kmax >= g.n() / 3.0) throw ResolutionError("synth_smooth_random: need 1 <= kmax < n/3");
  Rng rng(seed);
  auto s = Spectrum::zeros(g);
  for (std::size_t i = 1; i < g.size(); ++i) {
    const auto xi = g.wavevector(i);
    if (Grid::norm(xi) > kmax) continue;
    if (xi[0] < 0 || (xi[0] == 0 && xi[1] < 0)) continue;
    const double re = rng.normal();
    const double im = rng.normal();
    detail::hermitian_fill(g, s, xi, {re, im});
  }
  auto f = inverse(s, true);
  const double m = f.max_abs();
  if (m > 0.0) f *= amplitude / m;
  return f;
}

// ---------------------------------------------------------------------------
// Translation-based Besov norm

/// Periodic minimum-image length of a grid shift.
inline double shift_magnitude(const Grid& g, const Wavevector& shift) {
  double r2 = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const int s = ((shift[static_cast<std::size_t>(a)] % g.n()) + g.n()) % g.n();
    const double d = std::min(s, g.n() - s) * g.spacing();
    r2 += d * d;
  }
  return std::sqrt(r2);
}

/// Dyadic shifts 2^{-j} e_axis for j = 1..log2(n)-2 along every axis, then 16
/// seeded nonzero random grid shifts.
inline std::vector<Wavevector> default_shift_set(const Grid& g, std::uint64_t seed = 0) {
  std::vector<Wavevector> out;
  for (int a = 0; a < g.dim(); ++a) {
    for (int j = 1; j <= g.log2n() - 2; ++j) {
      Wavevector s{0, 0};
      s[static_cast<std::size_t>(a)] = g.n() >> j;
      out.push_back(s);
    }
  }
  Rng rng(seed + 0x51ed2701ull);
  while (out.size() < static_cast<std::size_t>(g.dim() * (g.log2n() - 2) + 16)) {
    Wavevector s{static_cast<int>(rng.next() % static_cast<std::uint64_t>(g.n())),
                 g.dim() == 2 ? static_cast<int>(rng.next() % static_cast<std::uint64_t>(g.n())) : 0};
    if (shift_magnitude(g, s) > 0.0) out.push_back(s);
  }
  return out;
}

struct ShiftProfileRow {
  Wavevector shift{};
  double shift_magnitude = 0.0;
  double diff_lp_norm = 0.0;
  double weighted_ratio = 0.0;
};

struct TranslationNormResult {
  double value = 0.0;
  std::size_t argmax_shift = 0;
  std::vector<ShiftProfileRow> profile;
};

/// max over shifts y of ||f(.+y) - f||_p / |y|^alpha. Translations are index
/// rolls. The torus has |y| <= sqrt(d)/2 < 1, so the value is nondecreasing in alpha.
inline TranslationNormResult besov_norm_translation(const ScalarField& f, double alpha, double p,
                                                    std::span<const Wavevector> shifts) {
  check_exponent(p);
  if (shifts.empty()) throw ArgumentError("besov_norm_translation: empty shift set");
  TranslationNormResult res;
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    const double y = shift_magnitude(f.grid(), shifts[i]);
    if (y == 0.0) throw ArgumentError("besov_norm_translation: zero shift");
    const double d = lp_norm(roll(f, shifts[i]) - f, p);
    const double w = d / std::pow(y, alpha);
    res.profile.push_back({shifts[i], y, d, w});
    if (w > res.value) {
      res.value = w;
      res.argmax_shift = i;
    }
  }
  return res;
}

inline void write_shift_profile_csv(std::ostream& os, const TranslationNormResult& r) {
  char buf[160];
  os << "shift_magnitude,diff_lp_norm,weighted_ratio\n";
  for (const auto& row : r.profile) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", row.shift_magnitude, row.diff_lp_norm, row.weighted_ratio);
    os << buf;
  }
}

struct NormEquivalenceReport {
  double translation_norm = 0.0;
  double lp_norm = 0.0;
  /// translation_norm / lp_norm on the input grid.
  double ratio = 0.0;
  /// Same ratio after band-limited refinement to 2n.
  double refined_ratio = 0.0;
  /// max/min of the two ratios is below 2.
  bool stable = false;
  /// Both norms vanish; ratios are reported as 0.
  bool degenerate = false;
};

/// Compares the two Besov norm definitions on f and on its refinement to 2n.
inline NormEquivalenceReport norm_equivalence_report(const ScalarField& f, double alpha, double p,
                                                     std::uint64_t shift_seed = 0) {
  NormEquivalenceReport r;
  auto ratio_on = [&](const ScalarField& g, double& tn, double& ln) {
    tn = besov_norm_translation(g, alpha, p, default_shift_set(g.grid(), shift_seed)).value;
    ln = besov_norm_lp(g, alpha, p).value;
    return ln > 0.0 ? tn / ln : 0.0;
  };
  r.ratio = ratio_on(f, r.translation_norm, r.lp_norm);
  if (r.translation_norm == 0.0 && r.lp_norm == 0.0) {
    r.degenerate = true;
    return r;
  }
  double tf = 0, lf = 0;
  r.refined_ratio = ratio_on(refine(f), tf, lf);
  const double hi = std::max(r.ratio, r.refined_ratio);
  const double lo = std::min(r.ratio, r.refined_ratio);
  r.stable = lo > 0.0 && hi / lo < 2.0;
  return r;
}

// ---------------------------------------------------------------------------
// Regularity estimators

/// Fit of log ||Delta_k f||_p against log 2^{-k} over blocks kmin..kmax; the
/// slope estimates the Besov regularity.
inline RateFit block_profile_regularity(const ScalarField& f, double p, int kmin, int kmax) {
  const auto s = transform(f);
  std::vector<double> scales, vals;
  for (int k = kmin; k <= kmax; ++k) {
    scales.push_back(std::ldexp(1.0, -k));
    vals.push_back(lp_norm(inverse(dyadic_block(s, k)), p));
  }
  return fit_rate(scales, vals);
}

inline RateFit block_profile_regularity(const VectorField& u, double p, int kmin, int kmax) {
  std::vector<Spectrum> s;
  for (const auto& c : u.components()) s.push_back(transform(c));
  std::vector<double> scales, vals;
  for (int k = kmin; k <= kmax; ++k) {
    std::vector<ScalarField> blocks;
    for (const auto& c : s) blocks.push_back(inverse(dyadic_block(c, k)));
    scales.push_back(std::ldexp(1.0, -k));
    vals.push_back(lp_norm(VectorField(std::move(blocks)), p));
  }
  return fit_rate(scales, vals);
}

/// Fit of log ||f(.+y) - f||_p against log |y| over the dyadic axis shifts
/// 2^{-j}, j = jmin..jmax, along axis 0.
inline RateFit translation_regularity(const ScalarField& f, double p, int jmin, int jmax) {
  const auto& g = f.grid();
  std::vector<double> ys, vals;
  for (int j = jmin; j <= jmax; ++j) {
    const Wavevector s{g.n() >> j, 0};
    ys.push_back(shift_magnitude(g, s));
    vals.push_back(lp_norm(roll(f, s) - f, p));
  }
  return fit_rate(ys, vals);
}

inline RateFit translation_regularity(const VectorField& u, double p, int jmin, int jmax) {
  const auto& g = u.grid();
  std::vector<double> ys, vals;
  for (int j = jmin; j <= jmax; ++j) {
    const Wavevector s{g.n() >> j, 0};
    std::vector<ScalarField> d;
    for (const auto& c : u.components()) d.push_back(roll(c, s) - c);
    ys.push_back(shift_magnitude(g, s));
    vals.push_back(lp_norm(VectorField(std::move(d)), p));
  }
  return fit_rate(ys, vals);
}

}  // namespace renorm
