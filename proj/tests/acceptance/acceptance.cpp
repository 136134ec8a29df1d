// One PASS/FAIL line per acceptance criterion. Tolerances are fixed here.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "oracles.hpp"
#include "renorm/besov.hpp"
#include "renorm/commutator.hpp"
#include "renorm/littlewood_paley.hpp"
#include "renorm/mollification.hpp"
#include "renorm/multiplier.hpp"
#include "renorm/solver.hpp"

using namespace renorm;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string format(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

std::vector<double> dyadic_eps(int kmin, int kmax) {
  std::vector<double> e;
  for (int k = kmin; k <= kmax; ++k) e.push_back(std::ldexp(1.0, -k));
  return e;
}

// 1. Littlewood-Paley exactness
Outcome check_lp_exactness() {
  double worst_rec = 0.0, worst_pou = 0.0;
  for (const Grid g : {Grid(1, 256), Grid(2, 128)}) {
    worst_pou = std::max(worst_pou, partition_of_unity_defect(g));
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const auto f = oracle::random_field(g, seed);
      const auto rec = reconstruct(decompose(f));
      worst_rec = std::max(worst_rec, lp_norm(rec - f, 2.0) / lp_norm(f, 2.0));
    }
  }
  return {worst_rec <= 1e-12 && worst_pou <= 1e-12,
          format("max reconstruction rel L2 %.3g, partition defect %.3g (tol 1e-12)", worst_rec, worst_pou)};
}

const Grid smoothing_grid(1, 65536);
constexpr int smoothing_K = 14;
constexpr double smoothing_alphas[] = {0.3, 0.5, 0.7};

// 2. Smoothing rate
Outcome check_smoothing() {
  const auto eps = dyadic_eps(3, 9);
  bool ok = true;
  std::string d;
  for (double alpha : smoothing_alphas) {
    const auto f = synth_lacunary(smoothing_grid, alpha, smoothing_K, 1);
    const auto fit = smoothing_rate(f, 3.0, eps);
    ok = ok && !fit.degenerate && std::abs(fit.slope - alpha) <= 0.07 && fit.r_squared >= 0.98;
    d += format("a=%.1f slope %.4f r2 %.5f; ", alpha, fit.slope, fit.r_squared);
  }
  return {ok, d + "(|slope-a| <= 0.07, r2 >= 0.98)"};
}

// 3. Gradient blow-up
Outcome check_gradient() {
  const auto eps = dyadic_eps(3, 9);
  bool ok = true;
  std::string d;
  for (double alpha : smoothing_alphas) {
    const auto f = synth_lacunary(smoothing_grid, alpha, smoothing_K, 1);
    const auto fit = gradient_blowup_rate(f, 3.0, 2.0, eps);
    const double pred = gradient_blowup_exponent(alpha, 1, 3.0, 2.0);
    ok = ok && !fit.degenerate && std::abs(fit.slope - pred) <= 0.1;
    d += format("a=%.1f slope %.4f (pred %.2f); ", alpha, fit.slope, pred);
  }
  return {ok, d + "(tol 0.1)"};
}

// 4. Lemma bound on a rough field
Outcome check_lemma() {
  const Grid g(1, 16384);
  const auto f = synth_rough_spectrum(g, 1.25, 7);
  const auto eps = dyadic_eps(3, 9);
  const auto s3 = lemma_l1_check(f, 3.0, 3.0, eps);
  const auto s2 = lemma_l1_check(f, 3.0, 2.0, eps);
  const bool ok = !s3.degenerate && !s2.degenerate && s3.slope >= -1.0 / 3.0 - 0.05 && s2.slope >= -0.05;
  return {ok, format("s=3 slope %.4f (>= %.4f), s=2 slope %.4g (>= -0.05)", s3.slope, -1.0 / 3.0 - 0.05, s2.slope)};
}

// 5. Commutator decay on a frozen pair
Outcome check_commutator() {
  const Grid g(2, 2048);
  const double alpha = 0.6, p = 3.0;
  const auto theta = synth_coherent_lacunary(g, alpha, 8, 1);
  const auto u = apply_multiplier(builtin_symbol("sqg"), theta);
  const auto beta_block = block_profile_regularity(u, p, 2, 7);
  const auto beta_shift = translation_regularity(u, p, 3, 8);
  const TestFunction phi(1.0, 0.25);
  const auto st = SpaceTimeField::frozen(theta, u, 1.0, 64);
  const auto eps = dyadic_eps(5, 9);
  const std::vector<Complex> zs{2.0, 2.2};
  CommutatorSweepOptions opt;
  opt.p = p;
  opt.alpha = alpha;
  opt.beta = beta_block.slope;
  opt.with_weak_residual = false;
  const auto sw = commutator_sweep(st, eps, zs, phi, opt);
  bool ok = !beta_block.degenerate && !beta_shift.degenerate;
  std::string d = format("beta block %.4f translation %.4f; ", beta_block.slope, beta_shift.slope);
  for (const auto& f : sw.fits) {
    // the stricter of the two beta estimates sets the threshold
    const double pred = std::max(f.predicted_exponent, commutator_exponent(alpha, beta_shift.slope, 2, p, f.z));
    const bool fok = !f.fit.degenerate && f.fit.slope >= pred - 0.1 && f.fit.r_squared >= 0.95 && f.split_defect <= 1e-8;
    ok = ok && fok;
    d += format("z=%.1f slope %.4f (>= %.4f) r2 %.4f split %.2g; ", f.z.real(), f.fit.slope, pred - 0.1,
                f.fit.r_squared, f.split_defect);
  }
  return {ok, d};
}

// 6. Conservation for SQG and IPM
Outcome check_conservation() {
  const Grid g(2, 256);
  bool ok = true;
  std::string d;
  for (const char* sym : {"sqg", "ipm"}) {
    SolverConfig c;
    c.grid = g;
    c.symbol = builtin_symbol(sym);
    c.dt = 5e-4;
    c.t_end = 1.0;
    c.snapshot_stride = 20;
    c.r_list = {2.0, 3.0};
    const auto res = run(synth_smooth_random(g, 4.0, 0.25, 3), c);
    if (!res.completed()) return {false, std::string(sym) + ": " + res.failure};
    const double d2 = norm_drift(res, 2.0), d3 = norm_drift(res, 3.0);
    const auto st = res.space_time();
    const TestFunction phi(1.0, 0.1);
    double worst = 0.0;
    for (Complex z : {Complex(2.0), Complex(2.2), Complex(2.5)}) {
      worst = std::max(worst, std::abs(weak_residual_F(st, z, phi)) / weak_residual_scale(st, z, phi));
    }
    ok = ok && d2 <= 1e-8 && d3 <= 1e-6 && worst <= 1e-6;
    d += format("%s drift2 %.3g drift3 %.3g |F|/scale %.3g max cfl %.3f; ", sym, d2, d3, worst, res.max_cfl);
  }
  return {ok, d + "(tol 1e-8, 1e-6, 1e-6)"};
}

// 7. Multiplier checks
Outcome check_multipliers() {
  const Grid g(2, 256);
  std::vector<ScalarField> family;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) family.push_back(synth_lacunary(g, 0.5, 6, seed));
  const auto mol = build_mollifier(g, 1.0 / 32.0);
  bool ok = true;
  std::string d;
  for (const char* name : {"sqg", "ipm"}) {
    const auto m = builtin_symbol(name);
    const double real = symbol_reality_defect(m, g);
    const double div = symbol_divergence_defect(m, g);
    const double sup = symbol_sup_norm(m, g);
    const auto b = boundedness_check(m, 3.0, 0.5, family);
    double comm = 0.0;
    for (const auto& f : family) {
      const auto s = transform(f);
      const auto direct = apply_multiplier(m, mollify(s, mol));
      const auto after = apply_multiplier(m, s);
      const auto blk = apply_multiplier(m, dyadic_block(s, 3));
      for (int j = 0; j < 2; ++j) {
        const auto a = mollify(after[j], mol);
        const auto bb = dyadic_block(after[j], 3);
        double scale = 0.0;
        for (auto v : after[j].coeffs()) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < g.size(); ++i) {
          comm = std::max(comm, std::abs(direct[j][i] - a[i]) / scale);
          comm = std::max(comm, std::abs(blk[j][i] - bb[i]) / scale);
        }
      }
    }
    ok = ok && real <= 1e-12 && div == 0.0 && sup <= 1.0 + 1e-12 && b.evaluated == family.size() &&
         b.besov_ratio <= 4.0 && comm <= 1e-12;
    d += format("%s reality %.2g div %.2g sup %.6f besov ratio %.4f commutation %.2g; ", name, real, div, sup,
                b.besov_ratio, comm);
  }
  return {ok, d};
}

// 8. Norm-estimator equivalence on the lacunary family
Outcome check_equivalence() {
  bool ok = true;
  double lo = 1e300, hi = 0.0, worst_stab = 1.0;
  for (const auto& [g, K] : {std::pair{Grid(1, 1024), 7}, std::pair{Grid(2, 128), 4}}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto r = norm_equivalence_report(synth_lacunary(g, 0.5, K, seed), 0.5, 3.0);
      ok = ok && !r.degenerate && r.stable && r.ratio >= 0.125 && r.ratio <= 8.0;
      lo = std::min({lo, r.ratio, r.refined_ratio});
      hi = std::max({hi, r.ratio, r.refined_ratio});
      worst_stab = std::max(worst_stab, std::max(r.ratio, r.refined_ratio) / std::min(r.ratio, r.refined_ratio));
    }
  }
  return {ok, format("ratios in [%.4f, %.4f], worst refinement change %.4fx (tol [1/8, 8], 2x)", lo, hi, worst_stab)};
}

// 9. Solver order from the time-discretization part of the r=3 drift
Outcome check_solver_order() {
  const Grid g(2, 64);
  const auto theta0 = synth_smooth_random(g, 3.0, 1.0, 11);
  auto final_l3 = [&](double dt) {
    SolverConfig c;
    c.grid = g;
    c.symbol = builtin_symbol("sqg");
    c.dt = dt;
    c.t_end = 1.0;
    c.snapshot_stride = 1 << 30;
    c.r_list = {2.0, 3.0};
    const auto res = run(theta0, c);
    if (!res.completed()) throw Error(res.failure);
    return std::pair{res.norm_series(3.0).back(), res.norm_series(2.0).back()};
  };
  const auto ref = final_l3(2.5e-4);
  const double n0 = lr_norm_to_r(theta0, 3.0), m0 = lr_norm_to_r(theta0, 2.0);
  const std::vector<double> dts{1e-2, 5e-3, 2.5e-3, 1.25e-3, 1e-3};
  std::vector<double> d3, d2;
  for (double dt : dts) {
    const auto v = final_l3(dt);
    d3.push_back(std::abs(v.first - ref.first) / n0);
    d2.push_back(std::abs(v.second - m0) / m0);
  }
  const auto fit = fit_rate(dts, d3);
  std::string d = format("r=3 drift exponent %.3f r2 %.4f (4 +- 0.5); drifts", fit.slope, fit.r_squared);
  for (double v : d3) d += format(" %.3g", v);
  d += "; r=2 drift";
  for (double v : d2) d += format(" %.3g", v);
  return {!fit.degenerate && std::abs(fit.slope - 4.0) <= 0.5, d};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 littlewood-paley exactness", check_lp_exactness}, {"2 smoothing rate", check_smoothing},
      {"3 gradient blow-up", check_gradient},              {"4 lemma bound", check_lemma},
      {"5 commutator decay", check_commutator},            {"6 conservation", check_conservation},
      {"7 multiplier checks", check_multipliers},          {"8 norm equivalence", check_equivalence},
      {"9 solver order", check_solver_order}};
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  %-30s %7.1fs  %s\n", o.pass ? "PASS" : "FAIL", name, secs, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
