#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "renorm/commutator.hpp"
#include "renorm/littlewood_paley.hpp"
#include "renorm/multiplier.hpp"
#include "renorm/spectral.hpp"

namespace renorm {

/// Transport d_t theta + u.grad theta = 0 with u = T[theta] (active) or a
/// prescribed time-independent u (passive).
struct SolverConfig {
  Grid grid{2, 64};
  std::optional<MultiplierSymbol> symbol;
  std::optional<VectorField> prescribed_u;
  double dt = 1e-3;
  double t_end = 1.0;
  bool dealias = true;
  /// Hyperviscous damping -nu (4 pi^2 |xi|^2)^order on the spectrum.
  double nu = 0.0;
  int hyper_order = 1;
  int snapshot_stride = 1;
  bool store_velocity = true;
  std::vector<double> r_list{2.0, 3.0};
  double cfl_warn = 0.5;
  double cfl_max = 2.0;

  [[nodiscard]] bool active() const noexcept { return symbol.has_value(); }
};

namespace detail {

inline void validate(const SolverConfig& c) {
  if (c.active() == c.prescribed_u.has_value()) {
    throw ConfigurationError("solver needs exactly one of a symbol (active) or a prescribed velocity (passive)");
  }
  if (!(c.dt > 0.0) || !(c.t_end > 0.0)) throw ConfigurationError("solver: dt and t_end must be positive");
  if (c.snapshot_stride < 1) throw ConfigurationError("solver: snapshot stride must be >= 1");
  if (c.nu < 0.0 || c.hyper_order < 1) throw ConfigurationError("solver: need nu >= 0 and hyperviscosity order >= 1");
  if (c.active()) {
    if (c.grid.dim() != 2) throw ConfigurationError("active coupling requires a 2D grid");
    if (!c.dealias) throw ConfigurationError("dealiasing must be on when the coupling is active");
    if (!c.symbol->warnings().empty() || symbol_divergence_defect(*c.symbol, c.grid) > 1e-12) {
      throw ConfigurationError("solver refuses symbol '" + c.symbol->name() + "': not divergence-free");
    }
  } else {
    require_same_grid(c.prescribed_u->grid(), c.grid, "prescribed velocity");
    if (c.prescribed_u->size() != static_cast<std::size_t>(c.grid.dim())) {
      throw ConfigurationError("prescribed velocity needs d components");
    }
  }
}

/// Spectral right-hand side evaluator with preallocated buffers.
class Advection {
 public:
  explicit Advection(const SolverConfig& c) : cfg_(c), g_(c.grid), N_(g_.size()) {
    validate(c);
    const int d = g_.dim();
    keep_.assign(N_, 1.0);
    damp_.assign(N_, 0.0);
    ik_.assign(static_cast<std::size_t>(d), std::vector<double>(N_, 0.0));
    for (std::size_t i = 0; i < N_; ++i) {
      const auto xi = g_.wavevector(i);
      bool keep = i != 0 && !g_.is_nyquist(xi);
      if (c.dealias)
        for (int a = 0; a < d; ++a) keep = keep && 3 * std::abs(xi[static_cast<std::size_t>(a)]) < g_.n();
      keep_[i] = keep ? 1.0 : 0.0;
      for (int a = 0; a < d; ++a) {
        const int k = xi[static_cast<std::size_t>(a)];
        ik_[static_cast<std::size_t>(a)][i] = k == -g_.n() / 2 ? 0.0 : two_pi * k;
      }
      if (c.nu > 0.0) {
        const double k2 = two_pi * two_pi * (static_cast<double>(xi[0]) * xi[0] + static_cast<double>(xi[1]) * xi[1]);
        damp_[i] = c.nu * std::pow(k2, c.hyper_order);
      }
    }
    if (c.active()) table_ = c.symbol->table(g_);
    if (c.prescribed_u) {
      for (const auto& comp : c.prescribed_u->components()) u_fixed_.emplace_back(comp.values().begin(), comp.values().end());
    }
    u_.assign(static_cast<std::size_t>(d), std::vector<Complex>(N_));
    grad_.assign(static_cast<std::size_t>(d), std::vector<Complex>(N_));
    prod_.assign(N_, {});
  }

  [[nodiscard]] const Grid& grid() const noexcept { return g_; }
  [[nodiscard]] std::span<const double> mask() const noexcept { return keep_; }

  /// Physical velocity components for the spectral state s.
  void velocity(std::span<const Complex> s, std::vector<std::vector<double>>& out) {
    const int d = g_.dim();
    out.assign(static_cast<std::size_t>(d), std::vector<double>(N_));
    if (!cfg_.active()) {
      out = u_fixed_;
      return;
    }
    for (std::size_t a = 0; a < static_cast<std::size_t>(d); ++a) {
      for (std::size_t i = 0; i < N_; ++i) u_[a][i] = (*table_)[i][a] * s[i];
      fft_inplace(g_, u_[a], FFTW_BACKWARD);
      for (std::size_t i = 0; i < N_; ++i) out[a][i] = u_[a][i].real();
    }
  }

  /// out = P(-u.grad theta) - damping * theta in spectral form; returns max |u|.
  double rhs(std::span<const Complex> s, std::span<Complex> out) {
    const auto d = static_cast<std::size_t>(g_.dim());
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t i = 0; i < N_; ++i) grad_[a][i] = Complex{0.0, ik_[a][i]} * s[i];
      fft_inplace(g_, grad_[a], FFTW_BACKWARD);
      if (cfg_.active()) {
        for (std::size_t i = 0; i < N_; ++i) u_[a][i] = (*table_)[i][a] * s[i];
        fft_inplace(g_, u_[a], FFTW_BACKWARD);
      }
    }
    double umax2 = 0.0;
    for (std::size_t i = 0; i < N_; ++i) {
      double acc = 0.0, m2 = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        const double ua = cfg_.active() ? u_[a][i].real() : u_fixed_[a][i];
        acc += ua * grad_[a][i].real();
        m2 += ua * ua;
      }
      prod_[i] = -acc;
      umax2 = std::max(umax2, m2);
    }
    fft_inplace(g_, prod_, FFTW_FORWARD);
    const double scale = 1.0 / static_cast<double>(N_);
    for (std::size_t i = 0; i < N_; ++i) out[i] = keep_[i] * (prod_[i] * scale - damp_[i] * s[i]);
    return std::sqrt(umax2);
  }

 private:
  const SolverConfig& cfg_;
  Grid g_;
  std::size_t N_;
  std::vector<double> keep_, damp_;
  std::vector<std::vector<double>> ik_;
  std::shared_ptr<const std::vector<SymbolValue>> table_;
  std::vector<std::vector<double>> u_fixed_;
  std::vector<std::vector<Complex>> u_, grad_;
  std::vector<Complex> prod_;
};

/// Classical RK4 step on the spectral state; returns max |u| at the step start.
inline double rk4_step(Advection& adv, std::vector<Complex>& s, double dt) {
  const std::size_t N = s.size();
  std::vector<Complex> k(N), acc(N), stage(N);
  const double umax = adv.rhs(s, k);
  for (std::size_t i = 0; i < N; ++i) {
    acc[i] = k[i];
    stage[i] = s[i] + 0.5 * dt * k[i];
  }
  adv.rhs(stage, k);
  for (std::size_t i = 0; i < N; ++i) {
    acc[i] += 2.0 * k[i];
    stage[i] = s[i] + 0.5 * dt * k[i];
  }
  adv.rhs(stage, k);
  for (std::size_t i = 0; i < N; ++i) {
    acc[i] += 2.0 * k[i];
    stage[i] = s[i] + dt * k[i];
  }
  adv.rhs(stage, k);
  for (std::size_t i = 0; i < N; ++i) s[i] += dt / 6.0 * (acc[i] + k[i]);
  s[0] = 0.0;
  return umax;
}

inline std::vector<Complex> initial_state(const ScalarField& theta0, const Advection& adv) {
  require_same_grid(theta0.grid(), adv.grid(), "solver initial data");
  auto s = transform(theta0);
  if (!is_mean_zero(s)) throw PreconditionError("solver: initial data must be mean-zero");
  std::vector<Complex> v(s.coeffs().begin(), s.coeffs().end());
  const auto mask = adv.mask();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= mask[i];
  return v;
}

inline double cfl_number(const SolverConfig& c, double umax) { return c.dt * umax * c.grid.n(); }

}  // namespace detail

/// -u.grad theta (dealiased when configured) minus nu (-Lap)^order theta.
inline ScalarField advect_rhs(const ScalarField& theta, const VectorField& u, const SolverConfig& config) {
  SolverConfig c = config;
  c.symbol.reset();
  c.prescribed_u = u;
  c.grid = theta.grid();
  if (config.active() && !divergence_free(u)) throw ConfigurationError("advect_rhs: velocity is not divergence-free");
  detail::Advection adv(c);
  const auto s = transform(theta);
  std::vector<Complex> out(s.size());
  adv.rhs(s.coeffs(), out);
  out[0] = 0.0;
  return inverse(Spectrum(theta.grid(), std::move(out)), true);
}

/// One RK4 step from theta (projected onto the dealiased band first).
inline ScalarField step_rk4(const ScalarField& theta, const SolverConfig& config) {
  detail::Advection adv(config);
  auto s = detail::initial_state(theta, adv);
  std::vector<Complex> k(s.size());
  const double umax = adv.rhs(s, k);
  const double cfl = detail::cfl_number(config, umax);
  if (cfl >= config.cfl_max) throw CflError("CFL number " + std::to_string(cfl) + " >= " + std::to_string(config.cfl_max));
  detail::rk4_step(adv, s, config.dt);
  for (auto v : s)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw BlowUpError("non-finite state", 1);
  return inverse(Spectrum(theta.grid(), std::move(s)), true);
}

struct NormSample {
  double t = 0.0;
  double r = 0.0;
  double value = 0.0;
};

enum class RunStatus { completed, cfl_violation, blow_up };

struct RunResult {
  std::vector<double> times;
  std::vector<ScalarField> theta;
  std::vector<VectorField> u;
  /// int |theta|^r at every step for every configured r.
  std::vector<NormSample> norms;
  RunStatus status = RunStatus::completed;
  std::string failure;
  long failed_step = -1;
  long steps = 0;
  double max_cfl = 0.0;
  std::vector<std::string> warnings;

  [[nodiscard]] bool completed() const noexcept { return status == RunStatus::completed; }
  [[nodiscard]] SpaceTimeField space_time() const { return SpaceTimeField::trajectory(times, theta, u); }
  /// Series of int |theta|^r for one r.
  [[nodiscard]] std::vector<double> norm_series(double r) const {
    std::vector<double> v;
    for (const auto& n : norms)
      if (n.r == r) v.push_back(n.value);
    return v;
  }
};

/// Fixed-step run to t_end. Step failures stop the run and are reported in
/// the result together with the partial trajectory.
inline RunResult run(const ScalarField& theta0, const SolverConfig& config) {
  detail::Advection adv(config);
  const long steps = std::lround(config.t_end / config.dt);
  if (steps < 1 || std::abs(steps * config.dt - config.t_end) > 1e-9 * config.t_end) {
    throw ConfigurationError("t_end must be a whole number of time steps");
  }
  auto s = detail::initial_state(theta0, adv);
  const auto& g = config.grid;
  RunResult res;
  res.steps = steps;
  if (config.nu > 0.0) res.warnings.push_back("hyperviscosity on: nu = " + std::to_string(config.nu));
  std::vector<std::vector<double>> vel;
  auto record = [&](long step, bool snapshot) {
    const double t = static_cast<double>(step) * config.dt;
    auto theta = inverse(Spectrum(g, s), true);
    for (double r : config.r_list) res.norms.push_back({t, r, lr_norm_to_r(theta, r)});
    if (!snapshot) return;
    res.times.push_back(t);
    if (config.store_velocity) {
      adv.velocity(s, vel);
      std::vector<ScalarField> comps;
      for (auto& c : vel) comps.emplace_back(g, c, true);
      res.u.emplace_back(std::move(comps));
    }
    res.theta.push_back(std::move(theta));
  };
  record(0, true);
  bool warned = false;
  for (long step = 1; step <= steps; ++step) {
    const auto prev = s;
    const double umax = detail::rk4_step(adv, s, config.dt);
    const double cfl = detail::cfl_number(config, umax);
    res.max_cfl = std::max(res.max_cfl, cfl);
    if (cfl >= config.cfl_max) {
      s = prev;
      res.status = RunStatus::cfl_violation;
      res.failed_step = step;
      res.failure = "CFL number " + std::to_string(cfl) + " >= " + std::to_string(config.cfl_max) + " at step " +
                    std::to_string(step);
      return res;
    }
    if (cfl > config.cfl_warn && !warned) {
      res.warnings.push_back("CFL number " + std::to_string(cfl) + " exceeds " + std::to_string(config.cfl_warn) +
                             " at step " + std::to_string(step));
      warned = true;
    }
    for (auto v : s) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        res.status = RunStatus::blow_up;
        res.failed_step = step;
        res.failure = "non-finite state at step " + std::to_string(step);
        return res;
      }
    }
    record(step, step % config.snapshot_stride == 0);
  }
  if (steps % config.snapshot_stride != 0) {
    res.warnings.push_back("t_end is not on the snapshot stride; last snapshot at t = " + std::to_string(res.times.back()));
  }
  return res;
}

/// Maximum relative drift of int |theta|^r over a run.
inline double norm_drift(const RunResult& r, double exponent) {
  const auto v = r.norm_series(exponent);
  if (v.empty() || v.front() == 0.0) return 0.0;
  double d = 0.0;
  for (double x : v) d = std::max(d, std::abs(x - v.front()) / v.front());
  return d;
}

}  // namespace renorm
