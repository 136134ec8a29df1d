#pragma once

// Experiment driver behind the `renorm` executable. Kept in a header so the
// test suite can call the subcommands in-process.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "renorm/besov.hpp"
#include "renorm/commutator.hpp"
#include "renorm/io.hpp"
#include "renorm/littlewood_paley.hpp"
#include "renorm/mollification.hpp"
#include "renorm/multiplier.hpp"
#include "renorm/solver.hpp"

namespace renorm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { exit_pass = 0, exit_check_failure = 1, exit_config_error = 2, exit_blow_up = 3 };

/// Raised for a numerical blow-up detected outside the solver's own reporting.
struct BlowUp : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Configuration

inline json pow2_list(int kmin, int kmax) {
  json a = json::array();
  for (int k = kmin; k <= kmax; ++k) a.push_back(std::ldexp(1.0, -k));
  return a;
}

/// Field recipe keys; unused keys are ignored by a given type.
inline json default_field(const std::string& type) {
  return {{"type", type},  {"alpha", 0.5},     {"K", 6},       {"seed", 1},      {"seeds", json::array({1})},
          {"decay", 1.25}, {"kmax", 4.0},      {"amplitude", 1.0}, {"xi", {1, 0}}, {"phase", 0.0},
          {"path", ""}};
}

inline json default_config(const std::string& cmd) {
  json c;
  c["output_dir"] = "out/" + cmd;
  if (cmd == "mollify-rate") {
    c["grid"] = {{"dim", 1}, {"n", 65536}};
    c["field"] = default_field("lacunary");
    c["field"]["K"] = 14;
    c["alpha_list"] = {0.3, 0.5, 0.7};
    c["p"] = 3.0;
    c["eps_list"] = pow2_list(3, 9);
    c["lemma"] = {{"enabled", true}, {"n", 16384}, {"decay", 1.25}, {"seed", 7}, {"s_list", {2.0, 3.0}}};
    c["tolerances"] = {{"slope", 0.07}, {"gradient_slope", 0.1}, {"r2", 0.98}, {"lemma_slack", 0.05}};
  } else if (cmd == "commutator-rate") {
    c["grid"] = {{"dim", 2}, {"n", 2048}};
    c["field"] = default_field("coherent_lacunary");
    c["field"]["alpha"] = 0.6;
    c["field"]["K"] = 8;
    c["symbol"] = "sqg";
    c["p"] = 3.0;
    c["eps_list"] = pow2_list(5, 9);
    c["z_list"] = {2.0, 2.2};
    c["beta"] = nullptr;
    c["beta_blocks"] = {2, 7};
    c["test_function"] = {{"horizon", 1.0}, {"margin", 0.25}, {"time_steps", 64}};
    c["weak_residual"] = false;
    c["tolerances"] = {{"slope", 0.1}, {"r2", 0.95}, {"split", 1e-8}};
  } else if (cmd == "simulate") {
    c["grid"] = {{"dim", 2}, {"n", 128}};
    c["field"] = default_field("smooth_random");
    c["field"]["amplitude"] = 0.25;
    c["field"]["seed"] = 3;
    c["symbol"] = "sqg";
    c["velocity"] = nullptr;
    c["dt"] = 1e-3;
    c["t_end"] = 1.0;
    c["dealias"] = true;
    c["hyperviscosity"] = {{"nu", 0.0}, {"order", 1}};
    c["snapshot_stride"] = 25;
    c["r_list"] = {1.5, 2.0, 3.0, 4.0};
    c["z_list"] = {2.0, 2.2, 2.5};
    c["test_function"] = {{"margin", 0.1}, {"chi", "none"}};
    c["store"] = {{"fields", true}, {"format", "bin"}};
    c["tolerances"] = {{"drift_r2", 1e-8}, {"drift", 1e-6}, {"weak_residual", 1e-6}};
  } else if (cmd == "besov") {
    c["grid"] = {{"dim", 1}, {"n", 1024}};
    c["field"] = default_field("lacunary");
    c["field"]["K"] = 7;
    c["field"]["seeds"] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    c["alpha"] = 0.5;
    c["p"] = 3.0;
    c["shift_seed"] = 0;
    c["tolerances"] = {{"ratio_min", 0.125}, {"ratio_max", 8.0}, {"refinement", 2.0}};
  } else if (cmd == "lp") {
    c["grid"] = {{"dim", 2}, {"n", 128}};
    c["field"] = default_field("rough_spectrum");
    c["field"]["seeds"] = {1, 2, 3};
    c["alpha"] = 0.5;
    c["p"] = 2.0;
    c["embedding"] = {{"p1", 2.0}, {"p2", 4.0}};
    c["tolerances"] = {{"reconstruction", 1e-12}, {"partition", 1e-12}};
  } else if (cmd == "multiplier") {
    c["grid"] = {{"dim", 2}, {"n", 256}};
    c["field"] = default_field("lacunary");
    c["field"]["K"] = 6;
    c["field"]["seeds"] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    c["symbols"] = {"sqg", "ipm"};
    c["symbol_table"] = "";
    c["export_tables"] = false;
    c["alpha"] = 0.5;
    c["p"] = 3.0;
    c["eps"] = 1.0 / 32.0;
    c["block"] = 3;
    c["tolerances"] = {{"ratio", 4.0}, {"commutation", 1e-12}, {"reality", 1e-12}, {"sup_norm", 1.0 + 1e-12}};
  } else {
    throw ConfigurationError("unknown subcommand '" + cmd + "'");
  }
  return c;
}

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"mollify-rate", "commutator-rate", "simulate", "besov", "lp", "multiplier"};
  return s;
}

/// Merges `user` into `base`, rejecting keys absent from `base`. A null in
/// `base` accepts any value.
inline void merge_strict(json& base, const json& user, const std::string& prefix = "") {
  if (!user.is_object()) throw ConfigurationError("config" + (prefix.empty() ? "" : " key '" + prefix + "'") + " must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigurationError("unknown config key '" + key + "'");
    auto& slot = base[it.key()];
    if (slot.is_object() && it.value().is_object()) {
      merge_strict(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

/// Applies --a.b.c=value; the value is parsed as JSON when possible and taken
/// as a string otherwise.
inline void apply_override(json& cfg, const std::string& key, const std::string& value) {
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = value;
  }
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) throw ConfigurationError("unknown config key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = v;
}

/// Resolved configuration: defaults, then the config file (a plain config or
/// a manifest written by an earlier run), then overrides.
inline json resolve_config(const std::string& cmd, const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& overrides) {
  json cfg = default_config(cmd);
  if (!path.empty()) {
    json user = io::read_json(path);
    if (user.contains("config") && user.contains("version")) {
      if (user.value("subcommand", cmd) != cmd) {
        throw ConfigurationError("manifest was written by '" + user.value("subcommand", std::string()) + "', not '" + cmd + "'");
      }
      user = user["config"];
    }
    if (user.contains("subcommand")) {
      if (user["subcommand"] != cmd) throw ConfigurationError("config is for subcommand " + user["subcommand"].dump());
      user.erase("subcommand");
    }
    merge_strict(cfg, user);
  }
  for (const auto& [k, v] : overrides) apply_override(cfg, k, v);
  return cfg;
}

// ---------------------------------------------------------------------------
// Helpers

template <class T>
T get(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigurationError("config key '" + key + "': " + e.what());
  }
}

inline Grid make_grid(const json& cfg) { return {get<int>(cfg.at("grid"), "dim"), get<int>(cfg.at("grid"), "n")}; }

inline std::vector<double> number_list(const json& j, const std::string& key) {
  std::vector<double> v;
  for (const auto& x : j.at(key)) {
    if (!x.is_number()) throw ConfigurationError("config key '" + key + "' must be a list of numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

/// z given as a number or as [re, im].
inline std::vector<Complex> complex_list(const json& j, const std::string& key) {
  std::vector<Complex> v;
  for (const auto& x : j.at(key)) {
    if (x.is_number()) {
      v.emplace_back(x.get<double>(), 0.0);
    } else if (x.is_array() && x.size() == 2) {
      v.emplace_back(x[0].get<double>(), x[1].get<double>());
    } else {
      throw ConfigurationError("config key '" + key + "': entries must be numbers or [re, im]");
    }
  }
  return v;
}

inline ScalarField make_field(const Grid& g, const json& recipe, std::uint64_t seed) {
  const auto type = get<std::string>(recipe, "type");
  if (type == "lacunary") return synth_lacunary(g, get<double>(recipe, "alpha"), get<int>(recipe, "K"), seed);
  if (type == "coherent_lacunary") {
    return synth_coherent_lacunary(g, get<double>(recipe, "alpha"), get<int>(recipe, "K"), seed);
  }
  if (type == "rough_spectrum") return synth_rough_spectrum(g, get<double>(recipe, "decay"), seed);
  if (type == "smooth_random") {
    return synth_smooth_random(g, get<double>(recipe, "kmax"), get<double>(recipe, "amplitude"), seed);
  }
  if (type == "single_mode") {
    const auto xi = recipe.at("xi");
    return single_mode(g, {xi.at(0).get<int>(), xi.size() > 1 ? xi.at(1).get<int>() : 0},
                       get<double>(recipe, "amplitude"), get<double>(recipe, "phase"));
  }
  if (type == "zero") return ScalarField::zeros(g);
  if (type == "file") {
    auto f = io::read_field(get<std::string>(recipe, "path"));
    require_same_grid(f.grid(), g, "field file");
    return f;
  }
  throw ConfigurationError("unknown field type '" + type +
                           "' (lacunary, coherent_lacunary, rough_spectrum, smooth_random, single_mode, zero, file)");
}

inline ScalarField make_field(const Grid& g, const json& recipe) {
  return make_field(g, recipe, get<std::uint64_t>(recipe, "seed"));
}

inline std::vector<ScalarField> make_family(const Grid& g, const json& recipe) {
  std::vector<ScalarField> fam;
  for (const auto& s : recipe.at("seeds")) fam.push_back(make_field(g, recipe, s.get<std::uint64_t>()));
  if (fam.empty()) throw ConfigurationError("field.seeds must not be empty");
  return fam;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// Collects output paths and check outcomes for the manifest.
struct Report {
  fs::path dir;
  json outputs = json::array();
  json checks = json::object();
  bool pass = true;

  std::ofstream file(const std::string& name) {
    outputs.push_back(name);
    return io::open_out(dir / name);
  }
  void check(const std::string& name, bool ok, json detail = json::object()) {
    detail["pass"] = ok;
    checks[name] = std::move(detail);
    pass = pass && ok;
  }
};

inline void write_fit_csv(Report& rep, const std::string& name, const RateFit& fit) {
  auto os = rep.file(name);
  write_csv(os, fit);
}

// ---------------------------------------------------------------------------
// Subcommands

inline void cmd_mollify_rate(const json& cfg, Report& rep) {
  const auto g = make_grid(cfg);
  const double p = get<double>(cfg, "p");
  const auto eps = number_list(cfg, "eps_list");
  check_sweep(eps);
  for (double e : eps) build_mollifier(g, e);  // resolution errors before any work
  const auto& tol = cfg.at("tolerances");
  json fits = json::array();
  auto record = [&](const std::string& name, const RateFit& fit, double pred, bool ok) {
    auto j = io::fit_json(fit);
    j["name"] = name;
    j["predicted_exponent"] = pred;
    j["pass"] = ok;
    fits.push_back(j);
    rep.check(name, ok, {{"fit", io::fit_json(fit)}, {"predicted", pred}});
  };
  for (double alpha : number_list(cfg, "alpha_list")) {
    auto recipe = cfg.at("field");
    recipe["alpha"] = alpha;
    const auto f = make_field(g, recipe);
    const auto sm = smoothing_rate(f, p, eps);
    const auto gr = gradient_blowup_rate(f, p, 2.0, eps);
    write_fit_csv(rep, "smoothing_alpha" + fmt(alpha) + ".csv", sm);
    write_fit_csv(rep, "gradient_alpha" + fmt(alpha) + ".csv", gr);
    const double gpred = gradient_blowup_exponent(alpha, g.dim(), p, 2.0);
    const bool sok = !sm.degenerate && std::abs(sm.slope - alpha) <= get<double>(tol, "slope") &&
                     sm.r_squared >= get<double>(tol, "r2");
    const bool gok = !gr.degenerate && std::abs(gr.slope - gpred) <= get<double>(tol, "gradient_slope");
    record("smoothing_alpha" + fmt(alpha), sm, alpha, sok);
    record("gradient_alpha" + fmt(alpha), gr, gpred, gok);
  }
  const auto& lem = cfg.at("lemma");
  if (get<bool>(lem, "enabled")) {
    const Grid lg(g.dim(), get<int>(lem, "n"));
    const auto f = synth_rough_spectrum(lg, get<double>(lem, "decay"), get<std::uint64_t>(lem, "seed"));
    for (double s : number_list(lem, "s_list")) {
      const auto fit = lemma_l1_check(f, p, s, eps);
      const double pred = lemma_l1_exponent(lg.dim(), p, s);
      write_fit_csv(rep, "lemma_s" + fmt(s) + ".csv", fit);
      record("lemma_s" + fmt(s), fit, pred, !fit.degenerate && fit.slope >= pred - get<double>(tol, "lemma_slack"));
    }
  }
  io::write_json(rep.dir / "fit.json", {{"fits", fits}});
  rep.outputs.push_back("fit.json");
}

inline void cmd_commutator_rate(const json& cfg, Report& rep) {
  const auto zs = complex_list(cfg, "z_list");
  for (auto z : zs) check_weight_exponent(z);
  const auto eps = number_list(cfg, "eps_list");
  check_sweep(eps);
  const auto& tf = cfg.at("test_function");
  const TestFunction phi(get<double>(tf, "horizon"), get<double>(tf, "margin"));
  for (double e : eps) {
    if (e > phi.margin()) throw SupportMarginError("eps " + fmt(e) + " exceeds test_function.margin");
  }
  const auto g = make_grid(cfg);
  for (double e : eps) build_mollifier(g, e);
  const auto sym = builtin_symbol(get<std::string>(cfg, "symbol"));
  const auto theta = make_field(g, cfg.at("field"));
  const auto u = apply_multiplier(sym, theta);
  const double p = get<double>(cfg, "p");
  const double alpha = get<double>(cfg.at("field"), "alpha");
  const int b0 = cfg.at("beta_blocks").at(0).get<int>();
  const int b1 = cfg.at("beta_blocks").at(1).get<int>();
  const auto beta_block = block_profile_regularity(u, p, b0, b1);
  const auto beta_shift = translation_regularity(u, p, b0 + 1, b1 + 1);
  const double beta = cfg.at("beta").is_null() ? beta_block.slope : cfg.at("beta").get<double>();
  json beta_info{{"used", beta}, {"block_profile", io::fit_json(beta_block)}, {"translation", io::fit_json(beta_shift)}};

  const auto st = SpaceTimeField::frozen(theta, u, phi.horizon(), get<int>(tf, "time_steps"));
  CommutatorSweepOptions opt;
  opt.p = p;
  opt.alpha = alpha;
  opt.beta = beta;
  opt.slope_tolerance = get<double>(cfg.at("tolerances"), "slope");
  opt.min_r_squared = get<double>(cfg.at("tolerances"), "r2");
  opt.with_weak_residual = get<bool>(cfg, "weak_residual");
  const auto sw = commutator_sweep(st, eps, zs, phi, opt);
  {
    auto os = rep.file("sweep.csv");
    write_sweep_csv(os, sw);
  }
  json fits = json::array();
  for (const auto& f : sw.fits) {
    fits.push_back({{"re_z", f.z.real()},
                    {"im_z", f.z.imag()},
                    {"slope", f.fit.slope},
                    {"intercept", f.fit.intercept},
                    {"r2", f.fit.r_squared},
                    {"predicted_exponent", f.predicted_exponent},
                    {"pass", f.pass}});
    const std::string tag = "z" + fmt(f.z.real()) + (f.z.imag() != 0.0 ? "_" + fmt(f.z.imag()) + "i" : "");
    rep.check("slope_" + tag, f.pass, fits.back());
    rep.check("split_" + tag, f.split_defect <= get<double>(cfg.at("tolerances"), "split"),
              {{"max_relative_defect", f.split_defect}});
  }
  io::write_json(rep.dir / "fit.json", {{"fits", fits}, {"beta", beta_info}});
  rep.outputs.push_back("fit.json");
}

inline ScalarField make_chi(const Grid& g, const std::string& kind) {
  if (kind == "cos") {
    return ScalarField::sample(g, [](double x, double y) {
      return 1.0 + 0.5 * std::cos(two_pi * x) * std::cos(two_pi * y);
    });
  }
  throw ConfigurationError("test_function.chi must be 'none' or 'cos'");
}

inline int cmd_simulate(const json& cfg, Report& rep) {
  const auto g = make_grid(cfg);
  SolverConfig sc;
  sc.grid = g;
  if (!cfg.at("velocity").is_null()) {
    const auto v = number_list(cfg, "velocity");
    if (v.size() != static_cast<std::size_t>(g.dim())) throw ConfigurationError("velocity needs d components");
    sc.prescribed_u = VectorField::constant(g, v);
  } else {
    sc.symbol = builtin_symbol(get<std::string>(cfg, "symbol"));
  }
  sc.dt = get<double>(cfg, "dt");
  sc.t_end = get<double>(cfg, "t_end");
  sc.dealias = get<bool>(cfg, "dealias");
  sc.nu = get<double>(cfg.at("hyperviscosity"), "nu");
  sc.hyper_order = get<int>(cfg.at("hyperviscosity"), "order");
  sc.snapshot_stride = get<int>(cfg, "snapshot_stride");
  sc.r_list = number_list(cfg, "r_list");
  const auto theta0 = make_field(g, cfg.at("field"));
  const auto res = run(theta0, sc);
  if (get<bool>(cfg.at("store"), "fields")) {
    io::write_trajectory(rep.dir / "trajectory", res, cfg, get<std::string>(cfg.at("store"), "format"));
    rep.outputs.push_back("trajectory/manifest.json");
  }
  {
    auto os = rep.file("norms.csv");
    io::write_norm_csv(os, res);
  }
  rep.checks["warnings"] = res.warnings;
  if (res.status == RunStatus::cfl_violation) throw CflError(res.failure);
  if (res.status == RunStatus::blow_up) throw BlowUp(res.failure);
  const auto& tol = cfg.at("tolerances");
  const bool conservative = sc.nu == 0.0;
  for (double r : sc.r_list) {
    const double d = norm_drift(res, r);
    const double lim = r == 2.0 ? get<double>(tol, "drift_r2") : get<double>(tol, "drift");
    if (conservative) {
      rep.check("drift_r" + fmt(r), d <= lim, {{"max_relative_drift", d}, {"tolerance", lim}});
    } else {
      rep.checks["drift_r" + fmt(r)] = {{"max_relative_drift", d}, {"diagnostic", true}};
    }
  }
  if (res.times.size() >= 3 && conservative) {
    const auto st = res.space_time();
    const auto& tf = cfg.at("test_function");
    const auto chi_kind = get<std::string>(tf, "chi");
    std::optional<ScalarField> chi;
    if (chi_kind != "none") chi = make_chi(g, chi_kind);
    const TestFunction phi(res.times.back(), get<double>(tf, "margin"), chi);
    for (auto z : complex_list(cfg, "z_list")) {
      const Complex F = weak_residual_F(st, z, phi);
      const double scale = weak_residual_scale(st, z, phi);
      const double rel = scale > 0.0 ? std::abs(F) / scale : std::abs(F);
      rep.check("weak_residual_z" + fmt(z.real()), rel <= get<double>(tol, "weak_residual"),
                {{"abs_F", std::abs(F)}, {"scaled", rel}});
    }
  }
  return exit_pass;
}

inline void cmd_besov(const json& cfg, Report& rep) {
  const auto g = make_grid(cfg);
  const auto fam = make_family(g, cfg.at("field"));
  const double alpha = get<double>(cfg, "alpha");
  const double p = get<double>(cfg, "p");
  const auto seed = get<std::uint64_t>(cfg, "shift_seed");
  const auto& tol = cfg.at("tolerances");
  auto os = rep.file("equivalence.csv");
  os << "member,translation_norm,lp_norm,ratio,refined_ratio,stable,degenerate\n";
  bool all_in = true, all_stable = true, any = false;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const auto r = norm_equivalence_report(fam[i], alpha, p, seed);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%d,%d\n", i, r.translation_norm, r.lp_norm, r.ratio,
                  r.refined_ratio, r.stable, r.degenerate);
    os << buf;
    if (r.degenerate) continue;
    any = true;
    all_in = all_in && r.ratio >= get<double>(tol, "ratio_min") && r.ratio <= get<double>(tol, "ratio_max");
    const double hi = std::max(r.ratio, r.refined_ratio), lo = std::min(r.ratio, r.refined_ratio);
    all_stable = all_stable && lo > 0.0 && hi / lo <= get<double>(tol, "refinement");
  }
  {
    auto bs = rep.file("block_profile.csv");
    write_block_profile_csv(bs, besov_norm_lp(fam.front(), alpha, p));
    auto ss = rep.file("shift_profile.csv");
    write_shift_profile_csv(ss, besov_norm_translation(fam.front(), alpha, p, default_shift_set(g, seed)));
  }
  if (!any) {
    rep.checks["degenerate"] = true;
    return;
  }
  rep.check("ratio_range", all_in);
  rep.check("refinement_stability", all_stable);
}

inline void cmd_lp(const json& cfg, Report& rep) {
  const auto g = make_grid(cfg);
  const auto fam = make_family(g, cfg.at("field"));
  const auto& tol = cfg.at("tolerances");
  const double pou = partition_of_unity_defect(g);
  rep.check("partition_of_unity", pou <= get<double>(tol, "partition"), {{"defect", pou}});
  double worst = 0.0;
  for (const auto& f : fam) {
    const double nf = lp_norm(f, 2.0);
    const double e = lp_norm(reconstruct(decompose(f)) - f, 2.0);
    worst = std::max(worst, nf > 0.0 ? e / nf : e);
  }
  rep.check("reconstruction", worst <= get<double>(tol, "reconstruction"), {{"max_relative_l2_error", worst}});
  const double alpha = get<double>(cfg, "alpha");
  const double p = get<double>(cfg, "p");
  const auto b = besov_norm_lp(fam.front(), alpha, p);
  {
    auto os = rep.file("block_profile.csv");
    write_block_profile_csv(os, b);
  }
  const auto& emb = cfg.at("embedding");
  const auto er = embedding_check(fam.front(), get<double>(emb, "p1"), get<double>(emb, "p2"), alpha);
  rep.checks["besov_norm"] = {{"value", b.value}, {"argmax_block", b.argmax_block}, {"alpha_out_of_range", b.alpha_out_of_range}};
  rep.checks["embedding"] = {{"source_alpha", er.source_alpha}, {"target_alpha", er.target_alpha},
                             {"source_norm", er.source_norm}, {"target_norm", er.target_norm}, {"ratio", er.ratio}};
}

inline void cmd_multiplier(const json& cfg, Report& rep) {
  const auto g = make_grid(cfg);
  std::vector<MultiplierSymbol> syms;
  for (const auto& s : cfg.at("symbols")) syms.push_back(builtin_symbol(s.get<std::string>()));
  if (const auto path = get<std::string>(cfg, "symbol_table"); !path.empty()) {
    std::ifstream is(path);
    if (!is) throw ConfigurationError("cannot read symbol table " + path);
    syms.push_back(read_symbol_csv(is, fs::path(path).stem().string()));
  }
  const auto fam = make_family(g, cfg.at("field"));
  const auto& tol = cfg.at("tolerances");
  const double p = get<double>(cfg, "p"), alpha = get<double>(cfg, "alpha");
  const auto mol = build_mollifier(g, get<double>(cfg, "eps"));
  const int k = get<int>(cfg, "block");
  for (const auto& m : syms) {
    const std::string tag = m.name();
    for (const auto& w : m.warnings()) std::cerr << "warning: " << w << '\n';
    if (get<bool>(cfg, "export_tables")) {
      auto os = rep.file("symbol_" + tag + ".csv");
      write_symbol_csv(os, m, g);
    }
    const double real = symbol_reality_defect(m, g);
    const double div = symbol_divergence_defect(m, g);
    const double sup = symbol_sup_norm(m, g);
    rep.check(tag + "_reality", real <= get<double>(tol, "reality"), {{"defect", real}});
    rep.check(tag + "_divergence_free", div == 0.0, {{"max_xi_dot_m", div}});
    rep.check(tag + "_sup_norm", sup <= get<double>(tol, "sup_norm"), {{"sup", sup}});
    const auto b = boundedness_check(m, p, alpha, fam);
    rep.check(tag + "_boundedness", b.evaluated == 0 || b.besov_ratio <= get<double>(tol, "ratio"),
              {{"besov_ratio", b.besov_ratio}, {"lp_ratio", b.lp_ratio}, {"evaluated", b.evaluated},
               {"warnings", b.warnings}});
    double cm = 0.0, cb = 0.0, im = 0.0;
    for (const auto& f : fam) {
      const auto u = apply_multiplier(m, f);
      const auto a = mollify(u, mol);
      const auto c = apply_multiplier(m, mollify(f, mol));
      const auto ud = apply_multiplier(m, dyadic_block(f, k));
      const double scale = std::max(u.max_magnitude(), 1e-300);
      for (std::size_t j = 0; j < 2; ++j) {
        cm = std::max(cm, (a[j] - c[j]).max_abs() / scale);
        cb = std::max(cb, (dyadic_block(u[j], k) - ud[j]).max_abs() / scale);
      }
      im = std::max(im, multiplier_reality_residual(m, f));
    }
    rep.check(tag + "_commutes_with_mollification", cm <= get<double>(tol, "commutation"), {{"max_relative", cm}});
    rep.check(tag + "_commutes_with_block", cb <= get<double>(tol, "commutation"), {{"max_relative", cb}});
    rep.check(tag + "_output_reality", im <= get<double>(tol, "reality"), {{"max_relative_imag", im}});
  }
}

// ---------------------------------------------------------------------------
// Entry point

/// Runs one subcommand on a resolved config; writes the manifest and returns the exit code.
inline int execute(const std::string& cmd, const json& cfg, std::ostream& out) {
  Report rep;
  rep.dir = get<std::string>(cfg, "output_dir");
  io::ensure_dir(rep.dir);
  int code = exit_pass;
  if (cmd == "mollify-rate") {
    cmd_mollify_rate(cfg, rep);
  } else if (cmd == "commutator-rate") {
    cmd_commutator_rate(cfg, rep);
  } else if (cmd == "simulate") {
    code = cmd_simulate(cfg, rep);
  } else if (cmd == "besov") {
    cmd_besov(cfg, rep);
  } else if (cmd == "lp") {
    cmd_lp(cfg, rep);
  } else if (cmd == "multiplier") {
    cmd_multiplier(cfg, rep);
  } else {
    throw ConfigurationError("unknown subcommand '" + cmd + "'");
  }
  if (code == exit_pass && !rep.pass) code = exit_check_failure;
  const json manifest{{"subcommand", cmd}, {"version", io::toolkit_version}, {"config", cfg},
                      {"outputs", rep.outputs}, {"checks", rep.checks}, {"exit_code", code}};
  io::write_json(rep.dir / "manifest.json", manifest);
  out << manifest["checks"].dump(2) << '\n';
  out << (code == exit_pass ? "PASS" : "FAIL") << ' ' << cmd << " -> " << (rep.dir / "manifest.json").string() << '\n';
  return code;
}

/// Splits leftover arguments of the form --key=value or --key value.
inline std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& extra) {
  std::vector<std::pair<std::string, std::string>> o;
  for (std::size_t i = 0; i < extra.size(); ++i) {
    const auto& a = extra[i];
    if (a.rfind("--", 0) != 0) throw ConfigurationError("unexpected argument '" + a + "'");
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      o.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
    } else if (i + 1 < extra.size() && extra[i + 1].rfind("--", 0) != 0) {
      o.emplace_back(a.substr(2), extra[i + 1]);
      ++i;
    } else {
      throw ConfigurationError("override '" + a + "' needs a value");
    }
  }
  return o;
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Renormalization and commutator-rate experiments for active scalar equations", "renorm"};
  app.require_subcommand(1, 1);
  std::map<std::string, CLI::App*> subs;
  std::string config_path;
  bool dry_run = false;
  for (const auto& name : subcommands()) {
    auto* s = app.add_subcommand(name);
    s->add_option("--config", config_path, "JSON config or manifest");
    s->add_flag("--dry-run", dry_run, "print the resolved config and exit");
    s->allow_extras();
    subs[name] = s;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? exit_pass : exit_config_error;
  }
  std::string cmd;
  for (const auto& [name, s] : subs)
    if (s->parsed()) cmd = name;
  try {
    const auto cfg = resolve_config(cmd, config_path, parse_overrides(subs[cmd]->remaining()));
    if (dry_run) {
      out << json{{"subcommand", cmd}, {"config", cfg}}.dump(2) << '\n';
      return exit_pass;
    }
    return execute(cmd, cfg, out);
  } catch (const BlowUpError& e) {
    err << "blow-up: " << e.what() << '\n';
    return exit_blow_up;
  } catch (const BlowUp& e) {
    err << "blow-up: " << e.what() << '\n';
    return exit_blow_up;
  } catch (const CflError& e) {
    err << "CFL error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config_error;
  }
}

}  // namespace renorm::cli
