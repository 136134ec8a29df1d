#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "renorm/littlewood_paley.hpp"
#include "renorm/spectral.hpp"

namespace renorm {

using SymbolValue = std::array<Complex, 2>;

/// Fourier multiplier symbol m: Z^2 \ {0} -> C^2 defining u_hat = m theta_hat.
/// Values are tabulated once per grid and shared between copies.
class MultiplierSymbol {
 public:
  using Eval = std::function<std::optional<SymbolValue>(const Wavevector&)>;

  MultiplierSymbol(std::string name, Eval eval, bool degree_zero)
      : name_(std::move(name)), eval_(std::move(eval)), degree_zero_(degree_zero),
        cache_(std::make_shared<Cache>()) {}

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] bool degree_zero() const noexcept { return degree_zero_; }
  /// nullopt where the symbol is undefined.
  [[nodiscard]] std::optional<SymbolValue> operator()(const Wavevector& xi) const { return eval_(xi); }
  [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  /// Values at every resolvable mode of `g` in FFT order. The zero mode and
  /// Nyquist modes are set to 0 (no real symmetric partner exists there).
  /// Throws SymbolError if the symbol is undefined at a resolvable mode.
  [[nodiscard]] std::shared_ptr<const std::vector<SymbolValue>> table(const Grid& g) const {
    if (g.dim() != 2) throw ArgumentError("multiplier symbols act on 2D grids");
    std::lock_guard lock(cache_->mutex);
    auto& slot = cache_->tables[g.n()];
    if (!slot) {
      auto t = std::make_shared<std::vector<SymbolValue>>(g.size(), SymbolValue{});
      for (std::size_t i = 1; i < g.size(); ++i) {
        const auto xi = g.wavevector(i);
        if (g.is_nyquist(xi)) continue;
        auto v = eval_(xi);
        if (!v) {
          throw SymbolError("symbol '" + name_ + "' undefined at xi = (" + std::to_string(xi[0]) + ", " +
                            std::to_string(xi[1]) + ")");
        }
        (*t)[i] = *v;
      }
      slot = std::move(t);
    }
    return slot;
  }

 private:
  struct Cache {
    std::mutex mutex;
    std::map<int, std::shared_ptr<const std::vector<SymbolValue>>> tables;
  };
  std::string name_;
  Eval eval_;
  bool degree_zero_ = true;
  std::vector<std::string> warnings_;
  std::shared_ptr<Cache> cache_;
};

namespace detail {
/// Rounds v toward zero so that k * v is exact for every integer |k| < 2^bits.
inline double exact_multiplicand(double v, int bits) {
  if (v == 0.0) return 0.0;
  int e = 0;
  std::frexp(v, &e);
  const double scale = std::ldexp(1.0, 53 - bits - e);
  return std::trunc(v * scale) / scale;
}

/// m(xi) = w (-xi_2, xi_1) with w rounded so both products are exact, which
/// makes xi . m(xi) vanish identically in floating point.
inline SymbolValue perpendicular_symbol(const Wavevector& xi, Complex w) {
  const int bits = std::bit_width(static_cast<unsigned>(std::max(std::abs(xi[0]), std::abs(xi[1]))));
  const Complex we{exact_multiplicand(w.real(), bits), exact_multiplicand(w.imag(), bits)};
  return {static_cast<double>(-xi[1]) * we, static_cast<double>(xi[0]) * we};
}
}  // namespace detail

/// Built-in symbols:
///   sqg:             m = i(-xi_2, xi_1)/|xi|
///   ipm:             m = (xi_1 xi_2, -xi_1^2)/|xi|^2  (gravity along -x_2)
///   riesz_1/riesz_2: -i xi_j/|xi| placed in component j
///   identity_vector: (1, 1)
inline MultiplierSymbol builtin_symbol(const std::string& name) {
  if (name == "sqg") {
    return {name, [](const Wavevector& xi) -> std::optional<SymbolValue> {
              if (xi[0] == 0 && xi[1] == 0) return std::nullopt;
              return detail::perpendicular_symbol(xi, {0.0, 1.0 / Grid::norm(xi)});
            }, true};
  }
  if (name == "ipm") {
    return {name, [](const Wavevector& xi) -> std::optional<SymbolValue> {
              if (xi[0] == 0 && xi[1] == 0) return std::nullopt;
              const double r2 = static_cast<double>(xi[0]) * xi[0] + static_cast<double>(xi[1]) * xi[1];
              return detail::perpendicular_symbol(xi, {-xi[0] / r2, 0.0});
            }, true};
  }
  if (name == "riesz_1" || name == "riesz_2") {
    const std::size_t j = name.back() == '1' ? 0 : 1;
    return {name, [j](const Wavevector& xi) -> std::optional<SymbolValue> {
              if (xi[0] == 0 && xi[1] == 0) return std::nullopt;
              SymbolValue m{};
              m[j] = Complex{0.0, -xi[j] / Grid::norm(xi)};
              return m;
            }, true};
  }
  if (name == "identity_vector") {
    return {name, [](const Wavevector&) -> std::optional<SymbolValue> { return SymbolValue{1.0, 1.0}; }, true};
  }
  throw ArgumentError("unknown symbol '" + name + "' (expected sqg, ipm, riesz_1, riesz_2, identity_vector)");
}

/// Symbol from explicit (xi, m(xi)) entries; missing conjugate partners are
/// filled with m(-xi) = conj(m(xi)). Modes absent from the table are
/// undefined. A divergence-free violation is recorded as a warning.
inline MultiplierSymbol table_symbol(std::string name, std::map<Wavevector, SymbolValue> entries) {
  std::vector<std::pair<Wavevector, SymbolValue>> add;
  for (const auto& [xi, m] : entries) {
    const Wavevector neg{-xi[0], -xi[1]};
    if (!entries.contains(neg)) add.push_back({neg, {std::conj(m[0]), std::conj(m[1])}});
  }
  for (auto& [xi, m] : add) entries.emplace(xi, m);
  double worst = 0.0;
  for (const auto& [xi, m] : entries) {
    const double scale = std::max(Grid::norm(xi) * std::hypot(std::abs(m[0]), std::abs(m[1])), 1e-300);
    worst = std::max(worst, std::abs(static_cast<double>(xi[0]) * m[0] + static_cast<double>(xi[1]) * m[1]) / scale);
  }
  auto shared = std::make_shared<const std::map<Wavevector, SymbolValue>>(std::move(entries));
  MultiplierSymbol sym(std::move(name),
                       [shared](const Wavevector& xi) -> std::optional<SymbolValue> {
                         auto it = shared->find(xi);
                         if (it == shared->end()) return std::nullopt;
                         return it->second;
                       },
                       false);
  if (worst > 1e-12) {
    sym.add_warning("symbol '" + sym.name() + "' is not divergence-free (max |xi.m|/(|xi||m|) = " +
                    std::to_string(worst) + ")");
  }
  return sym;
}

/// Reads CSV rows xi1,xi2,re_m1,im_m1,re_m2,im_m2; an optional header line is skipped.
inline MultiplierSymbol read_symbol_csv(std::istream& is, std::string name = "table") {
  std::map<Wavevector, SymbolValue> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.find("xi1") != std::string::npos) continue;
    for (auto& c : line)
      if (c == ',') c = ' ';
    std::istringstream ss(line);
    int x1 = 0, x2 = 0;
    double a = 0, b = 0, c = 0, d = 0;
    if (!(ss >> x1 >> x2 >> a >> b >> c >> d)) {
      throw ConfigurationError("symbol table line " + std::to_string(lineno) + ": expected 6 columns");
    }
    if (x1 == 0 && x2 == 0) throw ConfigurationError("symbol table line " + std::to_string(lineno) + ": xi = 0");
    entries[{x1, x2}] = {Complex{a, b}, Complex{c, d}};
  }
  return table_symbol(std::move(name), std::move(entries));
}

/// Writes the symbol at every resolvable nonzero non-Nyquist mode of g.
inline void write_symbol_csv(std::ostream& os, const MultiplierSymbol& m, const Grid& g) {
  const auto t = m.table(g);
  char buf[256];
  os << "xi1,xi2,re_m1,im_m1,re_m2,im_m2\n";
  for (std::size_t i = 1; i < g.size(); ++i) {
    const auto xi = g.wavevector(i);
    if (g.is_nyquist(xi)) continue;
    const auto& v = (*t)[i];
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g\n", xi[0], xi[1], v[0].real(), v[0].imag(),
                  v[1].real(), v[1].imag());
    os << buf;
  }
}

/// Component spectra m_j(xi) theta_hat(xi).
inline std::array<Spectrum, 2> apply_multiplier(const MultiplierSymbol& m, const Spectrum& theta) {
  const auto& g = theta.grid();
  const auto t = m.table(g);
  std::array<Spectrum, 2> out{Spectrum::zeros(g), Spectrum::zeros(g)};
  for (std::size_t i = 0; i < g.size(); ++i) {
    out[0][i] = (*t)[i][0] * theta[i];
    out[1][i] = (*t)[i][1] * theta[i];
  }
  return out;
}

/// u = T[theta]; theta must be mean-zero.
inline VectorField apply_multiplier(const MultiplierSymbol& m, const ScalarField& theta) {
  const auto s = transform(theta);
  if (!is_mean_zero(s)) throw PreconditionError("apply_multiplier: theta is not mean-zero");
  auto c = apply_multiplier(m, s);
  return VectorField({inverse(c[0], true), inverse(c[1], true)});
}

/// max over resolvable xi of |m(-xi) - conj m(xi)|.
inline double symbol_reality_defect(const MultiplierSymbol& m, const Grid& g) {
  const auto t = m.table(g);
  double d = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    const auto xi = g.wavevector(i);
    if (g.is_nyquist(xi)) continue;
    const auto& a = (*t)[i];
    const auto& b = (*t)[g.index_of({-xi[0], -xi[1]})];
    d = std::max({d, std::abs(b[0] - std::conj(a[0])), std::abs(b[1] - std::conj(a[1]))});
  }
  return d;
}

/// max over resolvable xi of |xi . m(xi)|, evaluated in floating point.
inline double symbol_divergence_defect(const MultiplierSymbol& m, const Grid& g) {
  const auto t = m.table(g);
  double d = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto xi = g.wavevector(i);
    const auto& v = (*t)[i];
    d = std::max(d, std::abs(static_cast<double>(xi[0]) * v[0] + static_cast<double>(xi[1]) * v[1]));
  }
  return d;
}

/// max over resolvable xi of the Euclidean norm |m(xi)|.
inline double symbol_sup_norm(const MultiplierSymbol& m, const Grid& g) {
  const auto t = m.table(g);
  double s = 0.0;
  for (const auto& v : *t) s = std::max(s, std::hypot(std::abs(v[0]), std::abs(v[1])));
  return s;
}

/// Largest relative imaginary part of the samples of T[theta].
inline double multiplier_reality_residual(const MultiplierSymbol& m, const ScalarField& theta) {
  auto c = apply_multiplier(m, transform(theta));
  double im = 0.0, mag = 0.0;
  for (const auto& s : c) {
    for (auto v : inverse_complex(s)) {
      im = std::max(im, std::abs(v.imag()));
      mag = std::max(mag, std::abs(v));
    }
  }
  return mag > 0.0 ? im / mag : 0.0;
}

struct BoundednessReport {
  /// max over the family of max_j ||T_j f||_B / ||f||_B.
  double besov_ratio = 0.0;
  /// max over the family of max_j ||T_j f||_p / ||f||_p.
  double lp_ratio = 0.0;
  std::size_t evaluated = 0;
  std::vector<std::string> warnings;
};

inline BoundednessReport boundedness_check(const MultiplierSymbol& m, double p, double alpha,
                                           std::span<const ScalarField> family) {
  if (family.empty()) throw ArgumentError("boundedness_check: empty family");
  BoundednessReport r;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto s = transform(family[i]);
    const double bf = besov_norm_lp(s, alpha, p).value;
    const double lf = lp_norm(family[i], p);
    if (bf == 0.0 || lf == 0.0) {
      r.warnings.push_back("family member " + std::to_string(i) + " has zero norm; skipped");
      continue;
    }
    for (const auto& c : apply_multiplier(m, s)) {
      r.besov_ratio = std::max(r.besov_ratio, besov_norm_lp(c, alpha, p).value / bf);
      r.lp_ratio = std::max(r.lp_ratio, lp_norm(inverse(c, true), p) / lf);
    }
    ++r.evaluated;
  }
  return r;
}

}  // namespace renorm
