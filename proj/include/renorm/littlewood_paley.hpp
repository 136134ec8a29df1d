#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <ostream>
#include <string>
#include <vector>

#include "renorm/profile.hpp"
#include "renorm/spectral.hpp"

namespace renorm {

/// Dyadic cutoffs: omega = 1 on |xi| <= 1/2, 0 on |xi| >= 1, and
/// phi(xi) = omega(xi/2) - omega(xi), so phi(xi / 2^k) lives on 2^{k-1} <= |xi| <= 2^{k+1}.
struct DyadicCutoff {
  static double omega(double r) noexcept { return plateau_cutoff(r); }
  static double phi(double r) noexcept { return plateau_cutoff(0.5 * r) - plateau_cutoff(r); }
  static double lambda(int k) noexcept { return std::ldexp(1.0, k); }
  /// Weight of block k at wavenumber magnitude r.
  static double weight(int k, double r) noexcept { return phi(r / lambda(k)); }
};

/// Last block index: the smallest K with 2^K >= the largest |xi| on the grid,
/// which makes omega + sum_{k<=K} phi_k identically one on the discrete spectrum.
inline int max_block_index(const Grid& g) {
  int k = 0;
  while (DyadicCutoff::lambda(k) < g.max_wavenumber()) ++k;
  return k;
}

/// max over resolvable xi != 0 of |omega(xi) + sum_k phi(xi/2^k) - 1|, summed term by term.
inline double partition_of_unity_defect(const Grid& g) {
  const int K = max_block_index(g);
  double d = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double r = Grid::norm(g.wavevector(i));
    double s = DyadicCutoff::omega(r);
    for (int k = 0; k <= K; ++k) s += DyadicCutoff::weight(k, r);
    d = std::max(d, std::abs(s - 1.0));
  }
  return d;
}

namespace detail {
inline void check_block(const Grid& g, int k) {
  if (k < 0 || k > max_block_index(g)) {
    throw ResolutionError("dyadic block " + std::to_string(k) + " outside 0.." + std::to_string(max_block_index(g)) +
                          " for n = " + std::to_string(g.n()));
  }
}
}  // namespace detail

inline Spectrum dyadic_block(Spectrum s, int k) {
  detail::check_block(s.grid(), k);
  s.apply([k](const Wavevector& xi) { return Complex{DyadicCutoff::weight(k, Grid::norm(xi)), 0.0}; });
  s[0] = 0.0;
  return s;
}

/// Delta_k f = F^{-1}(phi(2^{-k} xi) f_hat).
inline ScalarField dyadic_block(const ScalarField& f, int k) {
  return inverse(dyadic_block(transform(f), k), true);
}

/// FNV-1a over the grid and raw sample bytes; identifies the source of a decomposition.
inline std::uint64_t field_checksum(const ScalarField& f) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  const int dn[2] = {f.grid().dim(), f.grid().n()};
  mix(dn, sizeof dn);
  mix(f.values().data(), f.values().size_bytes());
  return h;
}

struct DyadicBlock {
  int k = 0;
  ScalarField field;
  std::uint64_t source_checksum = 0;
};

struct DyadicDecomposition {
  std::uint64_t source_checksum = 0;
  std::vector<DyadicBlock> blocks;
};

inline DyadicDecomposition decompose(const ScalarField& f) {
  DyadicDecomposition dec;
  dec.source_checksum = field_checksum(f);
  const auto s = transform(f);
  for (int k = 0; k <= max_block_index(f.grid()); ++k) {
    dec.blocks.push_back({k, inverse(dyadic_block(s, k), true), dec.source_checksum});
  }
  return dec;
}

/// Sum of the blocks; for mean-zero sources this reproduces the source.
inline ScalarField reconstruct(const DyadicDecomposition& dec) {
  if (dec.blocks.empty()) throw ConsistencyError("reconstruct: empty decomposition");
  const auto& g = dec.blocks.front().field.grid();
  if (dec.blocks.size() != static_cast<std::size_t>(max_block_index(g) + 1)) {
    throw ConsistencyError("reconstruct: decomposition does not cover every block");
  }
  auto sum = ScalarField::zeros(g);
  for (std::size_t i = 0; i < dec.blocks.size(); ++i) {
    const auto& b = dec.blocks[i];
    if (b.source_checksum != dec.source_checksum) throw ConsistencyError("reconstruct: blocks from different sources");
    if (b.k != static_cast<int>(i)) throw ConsistencyError("reconstruct: blocks out of order");
    sum += b.field;
  }
  return sum;
}

struct BlockProfileRow {
  int k = 0;
  double lambda = 0.0;
  double block_lp_norm = 0.0;
  double weighted_norm = 0.0;
};

struct BesovNormResult {
  double value = 0.0;
  int argmax_block = 0;
  /// alpha outside (0,1): the value is computed but lies outside the theory.
  bool alpha_out_of_range = false;
  std::vector<BlockProfileRow> profile;
};

/// Largest |f_hat(0)| relative to max |f_hat| tolerated for a "mean-zero" field.
inline constexpr double mean_zero_tolerance = 1e-12;

inline bool is_mean_zero(const Spectrum& s) {
  double m = 0.0;
  for (auto v : s.coeffs()) m = std::max(m, std::abs(v));
  return std::abs(s[0]) <= mean_zero_tolerance * std::max(m, 1e-300) || m == 0.0;
}

inline BesovNormResult besov_norm_lp(const Spectrum& s, double alpha, double p) {
  check_exponent(p);
  if (!is_mean_zero(s)) throw PreconditionError("besov_norm_lp: field is not mean-zero");
  BesovNormResult res;
  res.alpha_out_of_range = !(alpha > 0.0 && alpha < 1.0);
  for (int k = 0; k <= max_block_index(s.grid()); ++k) {
    const double b = lp_norm(inverse(dyadic_block(s, k)), p);
    const double w = std::pow(DyadicCutoff::lambda(k), alpha) * b;
    res.profile.push_back({k, DyadicCutoff::lambda(k), b, w});
    if (w > res.value) {
      res.value = w;
      res.argmax_block = k;
    }
  }
  return res;
}

/// sup_k 2^{k alpha} ||Delta_k f||_p, realized as a max over the blocks of the grid.
inline BesovNormResult besov_norm_lp(const ScalarField& f, double alpha, double p) {
  return besov_norm_lp(transform(f), alpha, p);
}

inline void write_block_profile_csv(std::ostream& os, const BesovNormResult& r) {
  char buf[160];
  os << "k,lambda_k,block_lp_norm,weighted_norm\n";
  for (const auto& row : r.profile) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", row.k, row.lambda, row.block_lp_norm, row.weighted_norm);
    os << buf;
  }
}

struct EmbeddingReport {
  double source_alpha = 0.0;
  double target_alpha = 0.0;
  double source_norm = 0.0;
  double target_norm = 0.0;
  /// target_norm / source_norm; 0 when the source norm vanishes.
  double ratio = 0.0;
};

/// Compares ||f||_{B^{alpha - d(1/p1 - 1/p2)}_{p2}} with ||f||_{B^alpha_{p1}}.
inline EmbeddingReport embedding_check(const ScalarField& f, double p1, double p2, double alpha) {
  if (p1 > p2) throw ArgumentError("embedding_check: need p1 <= p2");
  const auto s = transform(f);
  EmbeddingReport r;
  r.source_alpha = alpha;
  r.target_alpha = alpha - f.grid().dim() * (1.0 / p1 - 1.0 / p2);
  r.source_norm = besov_norm_lp(s, alpha, p1).value;
  r.target_norm = besov_norm_lp(s, r.target_alpha, p2).value;
  r.ratio = r.source_norm > 0.0 ? r.target_norm / r.source_norm : 0.0;
  return r;
}

}  // namespace renorm
