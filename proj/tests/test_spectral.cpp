#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "renorm/spectral.hpp"

using namespace renorm;
using Catch::Approx;

TEST_CASE("grid validates dimension and size") {
  CHECK_THROWS_AS(Grid(3, 16), ConfigurationError);
  CHECK_THROWS_AS(Grid(1, 12), ConfigurationError);
  CHECK_THROWS_AS(Grid(2, 4), ConfigurationError);
  const Grid g(2, 16);
  CHECK(g.size() == 256);
  CHECK(g.log2n() == 4);
  CHECK(g.wavenumber(7) == 7);
  CHECK(g.wavenumber(8) == -8);
  CHECK(g.wavenumber(15) == -1);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.index_of(g.wavevector(i)) == i);
}

TEST_CASE("transform matches the brute-force DFT") {
  for (int dim : {1, 2}) {
    const Grid g(dim, dim == 1 ? 64 : 16);
    const auto f = oracle::random_field(g, 11 + dim);
    const auto s = transform(f);
    const auto ref = oracle::brute_dft(f);
    double d = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) d = std::max(d, std::abs(s[i] - ref[i]));
    CHECK(d < 1e-13);
  }
}

TEST_CASE("inverse transform round trips and real fields are Hermitian") {
  const Grid g(2, 32);
  const auto f = oracle::random_field(g, 3);
  const auto s = transform(f);
  CHECK(hermitian_defect(s) < 1e-15);
  CHECK(oracle::max_abs_diff(inverse(s), f) < 1e-13);
}

TEST_CASE("Parseval: mean of f^2 equals sum of |f_hat|^2") {
  const Grid g(1, 128);
  const auto f = oracle::random_field(g, 5);
  double lhs = 0.0, rhs = 0.0;
  for (double v : f.values()) lhs += v * v;
  lhs /= g.size();
  const auto s = transform(f);
  for (auto c : s.coeffs()) rhs += std::norm(c);
  CHECK(lhs == Approx(rhs).epsilon(1e-13));
}

TEST_CASE("spectral derivative of a trigonometric polynomial is exact") {
  const Grid g(2, 32);
  const auto f = ScalarField::sample(g, [](double x, double y) { return std::sin(two_pi * (3 * x + 2 * y)); });
  const auto dx = spectral_derivative(f, 0);
  const auto dy = spectral_derivative(f, 1);
  const auto ex = ScalarField::sample(g, [](double x, double y) { return 3 * two_pi * std::cos(two_pi * (3 * x + 2 * y)); });
  const auto ey = ScalarField::sample(g, [](double x, double y) { return 2 * two_pi * std::cos(two_pi * (3 * x + 2 * y)); });
  CHECK(oracle::max_abs_diff(dx, ex) < 1e-11);
  CHECK(oracle::max_abs_diff(dy, ey) < 1e-11);
  CHECK_THROWS_AS(spectral_derivative(f, 2), ArgumentError);
}

TEST_CASE("spectral derivative agrees with a centered difference on smooth data") {
  const Grid g(1, 256);
  const auto f = ScalarField::sample(g, [](double x, double) { return std::exp(std::sin(two_pi * x)); });
  const auto d = spectral_derivative(f, 0);
  CHECK(oracle::max_abs_diff(d, oracle::centered_difference(f, 0)) < 1e-6);
}

TEST_CASE("derivative zeroes the Nyquist mode") {
  const Grid g(1, 16);
  const auto f = ScalarField::sample(g, [](double x, double) { return std::cos(two_pi * 8 * x); });
  CHECK(spectral_derivative(f, 0).max_abs() < 1e-14);
}

TEST_CASE("divergence of a gradient-free rotated field vanishes") {
  const Grid g(2, 32);
  const auto psi = oracle::random_field(g, 9);
  const auto gr = gradient(psi);
  // perpendicular gradient
  VectorField u({gr[1], gr[0] * -1.0});
  CHECK(divergence(u).max_abs() < 1e-9);
  CHECK(divergence_free(u));
  CHECK_FALSE(divergence_free(gr));
}

TEST_CASE("L^p norms of cos(2 pi x)") {
  const Grid g(1, 1024);
  const auto f = ScalarField::sample(g, [](double x, double) { return std::cos(two_pi * x); });
  CHECK(lp_norm(f, 2.0) == Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(lp_norm(f, 1.0) == Approx(2.0 / M_PI).epsilon(1e-5));
  CHECK(lp_norm(f, infinity) == Approx(1.0));
  CHECK_THROWS_AS(lp_norm(f, 0.5), ArgumentError);
}

TEST_CASE("vector L^p norm uses the Euclidean magnitude") {
  const Grid g(2, 16);
  const double c[2] = {3.0, 4.0};
  const auto u = VectorField::constant(g, c);
  CHECK(lp_norm(u, 2.0) == Approx(5.0));
  CHECK(lp_norm(u, infinity) == Approx(5.0));
  CHECK(u.max_magnitude() == Approx(5.0));
}

TEST_CASE("roll is an exact index shift") {
  const Grid g(2, 16);
  const auto f = oracle::random_field(g, 2);
  const auto r = roll(f, {3, -2});
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) CHECK(r[i * 16 + j] == f[((i + 3) % 16) * 16 + (j - 2 + 16) % 16]);
}

TEST_CASE("refine interpolates band-limited data exactly") {
  const Grid g(2, 16);
  const auto f = ScalarField::sample(g, [](double x, double y) { return std::cos(two_pi * (2 * x - 5 * y)) + std::sin(two_pi * 7 * x); });
  const auto r = refine(f);
  CHECK(r.grid().n() == 32);
  const auto e = ScalarField::sample(r.grid(), [](double x, double y) { return std::cos(two_pi * (2 * x - 5 * y)) + std::sin(two_pi * 7 * x); });
  CHECK(oracle::max_abs_diff(r, e) < 1e-13);
}
