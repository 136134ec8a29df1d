#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "renorm/errors.hpp"

namespace renorm {

/// Integer wavevector; unused trailing components are zero in 1D.
using Wavevector = std::array<int, 2>;

/// Uniform periodic grid on the unit torus [0,1)^d with normalized measure.
///
/// Samples sit at x_j = j/n along each axis; values are stored row-major with
/// axis 0 varying slowest. The discrete spectrum uses the FFT index order, so
/// index j maps to wavenumber j for j < n/2 and j - n otherwise (the Nyquist
/// index n/2 maps to -n/2).
class Grid {
 public:
  Grid() = default;

  Grid(int dim, int n) : dim_(dim), n_(n) {
    if (dim != 1 && dim != 2) {
      throw ConfigurationError("grid dimension must be 1 or 2, got " + std::to_string(dim));
    }
    if (n < 8 || (n & (n - 1)) != 0) {
      throw ConfigurationError("grid size must be a power of two >= 8, got " + std::to_string(n));
    }
  }

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] double spacing() const noexcept { return 1.0 / n_; }
  [[nodiscard]] std::size_t size() const noexcept {
    return dim_ == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_;
  }
  [[nodiscard]] int log2n() const noexcept {
    int k = 0;
    while ((1 << k) < n_) ++k;
    return k;
  }

  [[nodiscard]] int wavenumber(int index) const noexcept { return index < n_ / 2 ? index : index - n_; }

  [[nodiscard]] Wavevector wavevector(std::size_t flat) const noexcept {
    if (dim_ == 1) return {wavenumber(static_cast<int>(flat)), 0};
    const auto i0 = static_cast<int>(flat / n_);
    const auto i1 = static_cast<int>(flat % n_);
    return {wavenumber(i0), wavenumber(i1)};
  }

  /// Sample coordinate along `axis` of the flat index.
  [[nodiscard]] double coordinate(std::size_t flat, int axis) const noexcept {
    if (dim_ == 1) return static_cast<double>(flat) / n_;
    const auto i = axis == 0 ? flat / n_ : flat % n_;
    return static_cast<double>(i) / n_;
  }

  /// True if any component of the mode sits on the Nyquist index.
  [[nodiscard]] bool is_nyquist(const Wavevector& xi) const noexcept {
    return xi[0] == -n_ / 2 || (dim_ == 2 && xi[1] == -n_ / 2);
  }

  /// Flat spectral index of a wavevector with |xi_i| <= n/2.
  [[nodiscard]] std::size_t index_of(const Wavevector& xi) const noexcept {
    auto wrap = [this](int k) { return static_cast<std::size_t>(k < 0 ? k + n_ : k); };
    if (dim_ == 1) return wrap(xi[0]);
    return wrap(xi[0]) * n_ + wrap(xi[1]);
  }

  [[nodiscard]] static double norm(const Wavevector& xi) noexcept {
    return std::sqrt(static_cast<double>(xi[0]) * xi[0] + static_cast<double>(xi[1]) * xi[1]);
  }

  /// Largest |xi| present in the discrete spectrum (Nyquist included).
  [[nodiscard]] double max_wavenumber() const noexcept {
    return dim_ == 1 ? n_ / 2.0 : std::sqrt(2.0) * n_ / 2.0;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int dim_ = 1;
  int n_ = 8;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw ArgumentError(std::string(what) + ": grid mismatch");
}

}  // namespace renorm
