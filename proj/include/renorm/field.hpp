#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "renorm/grid.hpp"

namespace renorm {

using Complex = std::complex<double>;

/// Real periodic samples on a Grid.
///
/// `homogeneous` records that the field is declared mean-zero (an element of
/// the homogeneous function spaces); operations that require it check the
/// zero mode numerically rather than trusting the flag.
class ScalarField {
 public:
  ScalarField() = default;

  ScalarField(Grid grid, std::vector<double> values, bool homogeneous = false)
      : grid_(grid), values_(std::move(values)), homogeneous_(homogeneous) {
    if (values_.size() != grid_.size()) throw ArgumentError("ScalarField: sample count does not match grid");
  }

  static ScalarField zeros(const Grid& grid, bool homogeneous = true) {
    return {grid, std::vector<double>(grid.size(), 0.0), homogeneous};
  }

  static ScalarField constant(const Grid& grid, double c) {
    return {grid, std::vector<double>(grid.size(), c), c == 0.0};
  }

  /// Samples f(x0, x1) at the grid points (x1 = 0 in 1D).
  static ScalarField sample(const Grid& grid, const std::function<double(double, double)>& f,
                            bool homogeneous = false) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x0 = grid.coordinate(i, 0);
      const double x1 = grid.dim() == 2 ? grid.coordinate(i, 1) : 0.0;
      v[i] = f(x0, x1);
    }
    return {grid, std::move(v), homogeneous};
  }

  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::span<double> values() noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] bool homogeneous() const noexcept { return homogeneous_; }
  void set_homogeneous(bool h) noexcept { homogeneous_ = h; }

  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  [[nodiscard]] double max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  ScalarField& operator+=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField +=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    homogeneous_ = homogeneous_ && o.homogeneous_;
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField -=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    homogeneous_ = homogeneous_ && o.homogeneous_;
    return *this;
  }
  ScalarField& operator*=(double c) noexcept {
    for (double& v : values_) v *= c;
    return *this;
  }

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(ScalarField a, double c) { return a *= c; }
  friend ScalarField operator*(double c, ScalarField a) { return a *= c; }

  /// Pointwise product; the result is not declared homogeneous.
  friend ScalarField pointwise(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid_, b.grid_, "pointwise product");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values_[i] * b.values_[i];
    return {a.grid_, std::move(v), false};
  }

 private:
  Grid grid_;
  std::vector<double> values_;
  bool homogeneous_ = false;
};

/// Normalized Fourier coefficients f_hat(xi) = (1/N) sum_j f(x_j) e^{-2 pi i xi.x_j},
/// stored in FFT index order.
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(Grid grid, std::vector<Complex> coeffs) : grid_(grid), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != grid_.size()) throw ArgumentError("Spectrum: coefficient count does not match grid");
  }
  static Spectrum zeros(const Grid& grid) { return {grid, std::vector<Complex>(grid.size())}; }

  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] std::span<const Complex> coeffs() const noexcept { return coeffs_; }
  [[nodiscard]] std::span<Complex> coeffs() noexcept { return coeffs_; }
  [[nodiscard]] std::size_t size() const noexcept { return coeffs_.size(); }

  Complex operator[](std::size_t i) const noexcept { return coeffs_[i]; }
  Complex& operator[](std::size_t i) noexcept { return coeffs_[i]; }
  [[nodiscard]] Complex at(const Wavevector& xi) const noexcept { return coeffs_[grid_.index_of(xi)]; }

  Spectrum& operator+=(const Spectrum& o) {
    require_same_grid(grid_, o.grid_, "Spectrum +=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  Spectrum& operator-=(const Spectrum& o) {
    require_same_grid(grid_, o.grid_, "Spectrum -=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  Spectrum& operator*=(Complex c) noexcept {
    for (auto& v : coeffs_) v *= c;
    return *this;
  }
  friend Spectrum operator+(Spectrum a, const Spectrum& b) { return a += b; }
  friend Spectrum operator-(Spectrum a, const Spectrum& b) { return a -= b; }
  friend Spectrum operator*(Spectrum a, Complex c) { return a *= c; }

  /// Multiplies every coefficient by `weight(xi)`.
  template <class F>
  Spectrum& apply(F&& weight) {
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] *= weight(grid_.wavevector(i));
    return *this;
  }

 private:
  Grid grid_;
  std::vector<Complex> coeffs_;
};

/// d-component periodic vector field; all components share one grid.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(std::vector<ScalarField> components) : components_(std::move(components)) {
    if (components_.empty()) throw ArgumentError("VectorField: no components");
    for (const auto& c : components_) require_same_grid(components_.front().grid(), c.grid(), "VectorField");
  }
  static VectorField zeros(const Grid& grid) {
    return VectorField(std::vector<ScalarField>(static_cast<std::size_t>(grid.dim()), ScalarField::zeros(grid)));
  }
  /// Spatially constant field with the given components.
  static VectorField constant(const Grid& grid, std::span<const double> c) {
    std::vector<ScalarField> comps;
    for (double v : c) comps.push_back(ScalarField::constant(grid, v));
    return VectorField(std::move(comps));
  }

  [[nodiscard]] const Grid& grid() const { return components_.front().grid(); }
  [[nodiscard]] std::size_t size() const noexcept { return components_.size(); }
  [[nodiscard]] const ScalarField& operator[](std::size_t i) const noexcept { return components_[i]; }
  [[nodiscard]] ScalarField& operator[](std::size_t i) noexcept { return components_[i]; }
  [[nodiscard]] const std::vector<ScalarField>& components() const noexcept { return components_; }

  /// Largest pointwise Euclidean magnitude.
  [[nodiscard]] double max_magnitude() const {
    double m = 0.0;
    for (std::size_t j = 0; j < grid().size(); ++j) {
      double s = 0.0;
      for (const auto& c : components_) s += c[j] * c[j];
      m = std::max(m, s);
    }
    return std::sqrt(m);
  }

  VectorField& operator-=(const VectorField& o) {
    if (o.size() != size()) throw ArgumentError("VectorField -=: component count mismatch");
    for (std::size_t i = 0; i < size(); ++i) components_[i] -= o.components_[i];
    return *this;
  }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }

 private:
  std::vector<ScalarField> components_;
};

}  // namespace renorm
