#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "renorm/besov.hpp"
#include "renorm/multiplier.hpp"
#include "renorm/solver.hpp"

using namespace renorm;
using Catch::Approx;

namespace {
SolverConfig active(const Grid& g, const char* sym, double dt, double t_end) {
  SolverConfig c;
  c.grid = g;
  c.symbol = builtin_symbol(sym);
  c.dt = dt;
  c.t_end = t_end;
  return c;
}
}  // namespace

TEST_CASE("single SQG mode is a steady state") {
  const Grid g(2, 32);
  const auto theta = single_mode(g, {1, 0});
  const auto u = apply_multiplier(builtin_symbol("sqg"), theta);
  auto c = active(g, "sqg", 1e-3, 0.1);
  CHECK(advect_rhs(theta, u, c).max_abs() < 1e-15);
  const auto res = run(theta, c);
  REQUIRE(res.completed());
  CHECK(res.steps == 100);
  CHECK(oracle::max_abs_diff(res.theta.back(), theta) <= 1e-8);
}

TEST_CASE("zero velocity gives zero or purely dissipative rhs") {
  const Grid g(2, 16);
  const auto theta = oracle::random_field(g, 1);
  SolverConfig c;
  c.grid = g;
  c.dealias = false;
  CHECK(advect_rhs(theta, VectorField::zeros(g), c).max_abs() == 0.0);
  c.nu = 1e-3;
  const auto r = advect_rhs(theta, VectorField::zeros(g), c);
  const auto s = transform(theta);
  const auto rs = transform(r);
  for (std::size_t i = 1; i < g.size(); ++i) {
    const auto xi = g.wavevector(i);
    if (g.is_nyquist(xi)) continue;
    const double k2 = two_pi * two_pi * (xi[0] * xi[0] + xi[1] * xi[1]);
    CHECK(std::abs(rs[i] + 1e-3 * k2 * s[i]) <= 1e-12 * std::max(1.0, std::abs(s[i]) * k2));
  }
}

TEST_CASE("uniform velocity gives the translation generator") {
  const Grid g(2, 32);
  const auto theta = synth_smooth_random(g, 6.0, 1.0, 2);
  const double c[2] = {0.4, -0.2};
  SolverConfig cfg;
  cfg.grid = g;
  cfg.dealias = false;
  const auto r = advect_rhs(theta, VectorField::constant(g, c), cfg);
  const auto e = spectral_derivative(theta, 0) * -0.4 + spectral_derivative(theta, 1) * 0.2;
  CHECK(oracle::max_abs_diff(r, e) < 1e-12);
}

TEST_CASE("passive uniform transport matches the spectral phase shift") {
  const Grid g(2, 32);
  const auto theta0 = synth_smooth_random(g, 4.0, 1.0, 3);
  const double v[2] = {0.5, 0.25};
  SolverConfig c;
  c.grid = g;
  c.prescribed_u = VectorField::constant(g, v);
  c.dt = 1e-3;
  c.t_end = 0.2;
  c.snapshot_stride = 50;
  const auto res = run(theta0, c);
  REQUIRE(res.completed());
  auto s = transform(theta0);
  s.apply([&](const Wavevector& xi) { return std::polar(1.0, -two_pi * (xi[0] * v[0] + xi[1] * v[1]) * 0.2); });
  CHECK(oracle::max_abs_diff(res.theta.back(), inverse(s)) <= 1e-8);
  CHECK(res.times.size() == 5);
  CHECK(res.u.size() == 5);
}

TEST_CASE("zero field stays zero") {
  const Grid g(2, 16);
  const auto res = run(ScalarField::zeros(g), active(g, "ipm", 1e-2, 0.1));
  REQUIRE(res.completed());
  CHECK(res.theta.back().max_abs() == 0.0);
}

TEST_CASE("mean stays zero and quadratic invariants are conserved") {
  // the cubic drift is spatial truncation error, hence the finer grid
  const Grid g(2, 128);
  for (const char* sym : {"sqg", "ipm"}) {
    auto c = active(g, sym, 2e-3, 0.2);
    c.snapshot_stride = 10;
    c.r_list = {2.0, 3.0};
    const auto res = run(synth_smooth_random(g, 4.0, 0.25, 5), c);
    REQUIRE(res.completed());
    for (const auto& th : res.theta) CHECK(std::abs(transform(th)[0]) <= 1e-14);
    CHECK(norm_drift(res, 2.0) <= 1e-10);
    CHECK(norm_drift(res, 3.0) <= 1e-6);
  }
}

TEST_CASE("hyperviscosity makes the L2 norm nonincreasing") {
  const Grid g(2, 32);
  auto c = active(g, "sqg", 2e-3, 0.2);
  c.nu = 1e-3;
  const auto res = run(synth_smooth_random(g, 6.0, 1.0, 6), c);
  REQUIRE(res.completed());
  const auto s = res.norm_series(2.0);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] <= s[i - 1]);
  CHECK(s.back() < s.front());
  CHECK_FALSE(res.warnings.empty());
}

TEST_CASE("CFL limits") {
  const Grid g(2, 32);
  const auto theta = synth_smooth_random(g, 3.0, 1.0, 7);
  const double umax = apply_multiplier(builtin_symbol("sqg"), theta).max_magnitude();
  // dt chosen for a CFL number of about 3
  auto c = active(g, "sqg", 3.0 / (umax * 32), 3.0 / (umax * 32) * 4);
  CHECK_THROWS_AS(step_rk4(theta, c), CflError);
  const auto res = run(theta, c);
  CHECK(res.status == RunStatus::cfl_violation);
  CHECK(res.failed_step == 1);
  CHECK(res.theta.size() == 1);
  // CFL about 1: runs with a warning
  auto w = active(g, "sqg", 1.0 / (umax * 32), 1.0 / (umax * 32) * 2);
  const auto ok = run(theta, w);
  CHECK(ok.completed());
  CHECK_FALSE(ok.warnings.empty());
}

TEST_CASE("configuration checks") {
  const Grid g(2, 16);
  const auto theta = oracle::random_field(g, 1);
  auto c = active(g, "sqg", 1e-3, 1e-2);
  c.dealias = false;
  CHECK_THROWS_AS(run(theta, c), ConfigurationError);
  std::map<Wavevector, SymbolValue> e;
  for (std::size_t i = 1; i < g.size(); ++i) e[g.wavevector(i)] = {Complex(1, 0), Complex(0, 0)};
  auto d = active(g, "sqg", 1e-3, 1e-2);
  d.symbol = table_symbol("radial", e);
  CHECK_THROWS_AS(run(theta, d), ConfigurationError);
  auto t = active(g, "sqg", 3e-3, 1e-2);
  CHECK_THROWS_AS(run(theta, t), ConfigurationError);
  CHECK_THROWS_AS(run(theta + ScalarField::constant(g, 1.0), active(g, "sqg", 1e-3, 1e-2)), PreconditionError);
  SolverConfig none;
  none.grid = g;
  CHECK_THROWS_AS(run(theta, none), ConfigurationError);
}

TEST_CASE("runs are bit-for-bit reproducible") {
  const Grid g(2, 32);
  auto c = active(g, "sqg", 2e-3, 0.05);
  const auto a = run(synth_smooth_random(g, 4.0, 0.5, 8), c);
  const auto b = run(synth_smooth_random(g, 4.0, 0.5, 8), c);
  CHECK(oracle::max_abs_diff(a.theta.back(), b.theta.back()) == 0.0);
}
