#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "renorm/mollification.hpp"
#include "renorm/rate_fit.hpp"
#include "renorm/spectral.hpp"

namespace renorm {

/// Magnitudes below this are treated as zero by the complex power and weight.
inline constexpr double power_clamp = 1e-300;

/// |v|^z = |v|^{Re z} (cos(Im z ln|v|) + i sin(Im z ln|v|)), and 0 at v = 0.
inline Complex abs_power(double v, Complex z) {
  const double a = std::abs(v);
  if (a < power_clamp) return {};
  const double l = std::log(a);
  return std::polar(std::exp(z.real() * l), z.imag() * l);
}

/// z |v|^{z-1} sgn v, and 0 at v = 0.
inline Complex renorm_weight(double v, Complex z) {
  if (std::abs(v) < power_clamp) return {};
  const Complex w = z * abs_power(v, z - 1.0);
  return v > 0.0 ? w : -w;
}

inline void check_weight_exponent(Complex z) {
  if (!(z.real() > 1.0)) {
    throw DomainError("renormalization weight needs Re z > 1, got z = " + std::to_string(z.real()) + " + " +
                      std::to_string(z.imag()) + "i");
  }
}

/// Complex samples of |f|^z.
inline std::vector<Complex> abs_power(const ScalarField& f, Complex z) {
  std::vector<Complex> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = abs_power(f[i], z);
  return out;
}

/// phi(t, x) = psi(t) chi(x) with psi(t) = exp(-1/(s(1-s))), s = (t - margin)/(T - 2 margin).
class TestFunction {
 public:
  TestFunction(double horizon, double margin, std::optional<ScalarField> chi = std::nullopt)
      : horizon_(horizon), margin_(margin), chi_(std::move(chi)) {
    if (!(horizon > 0.0) || !(margin > 0.0) || !(2.0 * margin < horizon)) {
      throw ArgumentError("test function needs 0 < margin < horizon/2");
    }
    if (chi_) grad_chi_ = gradient(*chi_);
  }

  [[nodiscard]] double horizon() const noexcept { return horizon_; }
  [[nodiscard]] double margin() const noexcept { return margin_; }
  [[nodiscard]] const std::optional<ScalarField>& chi() const noexcept { return chi_; }
  [[nodiscard]] const std::optional<VectorField>& grad_chi() const noexcept { return grad_chi_; }

  /// Offset from the support midpoint in units of the support length, in (-1/2, 1/2).
  [[nodiscard]] double centered(double t) const noexcept { return (t - 0.5 * horizon_) / (horizon_ - 2.0 * margin_); }

  /// psi and d psi/dt as functions of the centered offset c. psi is even and
  /// psi' odd in c, bit for bit.
  [[nodiscard]] static double psi_centered(double c) noexcept {
    const double q = 0.25 - c * c;
    return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
  }
  [[nodiscard]] double dpsi_centered(double c) const noexcept {
    const double q = 0.25 - c * c;
    if (!(q > 0.0)) return 0.0;
    return std::exp(-1.0 / q) * (-2.0 * c) / (q * q) / (horizon_ - 2.0 * margin_);
  }
  [[nodiscard]] double psi(double t) const noexcept { return psi_centered(centered(t)); }
  [[nodiscard]] double dpsi(double t) const noexcept { return dpsi_centered(centered(t)); }

 private:
  double horizon_;
  double margin_;
  std::optional<ScalarField> chi_;
  std::optional<VectorField> grad_chi_;
};

/// Time samples t_0..t_M with one snapshot of theta (and optionally u) each.
/// A frozen field stores a single snapshot used at every time.
class SpaceTimeField {
 public:
  static SpaceTimeField frozen(ScalarField theta, std::optional<VectorField> u, double horizon, int steps) {
    if (steps < 2) throw ArgumentError("frozen field needs at least 2 time steps");
    std::vector<double> t(static_cast<std::size_t>(steps) + 1);
    for (int m = 0; m <= steps; ++m) t[static_cast<std::size_t>(m)] = horizon * m / steps;
    SpaceTimeField f;
    f.times_ = std::move(t);
    f.theta_.push_back(std::move(theta));
    if (u) f.u_.push_back(std::move(*u));
    f.frozen_ = true;
    f.validate();
    return f;
  }

  static SpaceTimeField trajectory(std::vector<double> times, std::vector<ScalarField> theta,
                                   std::vector<VectorField> u = {}) {
    SpaceTimeField f;
    f.times_ = std::move(times);
    f.theta_ = std::move(theta);
    f.u_ = std::move(u);
    if (f.theta_.size() != f.times_.size()) throw ArgumentError("trajectory: one snapshot per time required");
    if (!f.u_.empty() && f.u_.size() != f.times_.size()) throw ArgumentError("trajectory: u snapshot count mismatch");
    f.validate();
    return f;
  }

  [[nodiscard]] bool is_frozen() const noexcept { return frozen_; }
  [[nodiscard]] bool has_velocity() const noexcept { return !u_.empty(); }
  [[nodiscard]] std::span<const double> times() const noexcept { return times_; }
  [[nodiscard]] std::size_t samples() const noexcept { return times_.size(); }
  [[nodiscard]] double dt() const noexcept { return times_[1] - times_[0]; }
  [[nodiscard]] const ScalarField& theta(std::size_t m) const { return theta_[frozen_ ? 0 : m]; }
  [[nodiscard]] const VectorField& u(std::size_t m) const {
    if (u_.empty()) throw ArgumentError("space-time field carries no velocity");
    return u_[frozen_ ? 0 : m];
  }
  [[nodiscard]] const Grid& grid() const { return theta_.front().grid(); }
  /// Number of distinct snapshots (1 when frozen).
  [[nodiscard]] std::size_t snapshots() const noexcept { return theta_.size(); }

 private:
  void validate() const {
    if (times_.size() < 2) throw ArgumentError("space-time field needs at least two times");
    const double dt = times_[1] - times_[0];
    if (!(dt > 0.0)) throw ArgumentError("space-time field: times must increase");
    for (std::size_t m = 1; m < times_.size(); ++m) {
      if (std::abs(times_[m] - times_[m - 1] - dt) > 1e-9 * dt) throw ArgumentError("space-time field: nonuniform time step");
    }
    for (const auto& t : theta_) require_same_grid(theta_.front().grid(), t.grid(), "space-time field");
    for (const auto& v : u_) require_same_grid(theta_.front().grid(), v.grid(), "space-time field");
  }

  std::vector<double> times_;
  std::vector<ScalarField> theta_;
  std::vector<VectorField> u_;
  bool frozen_ = false;
};

namespace detail {
/// Rectangle-rule weights dt psi(t_m) and dt psi'(t_m). When the samples are
/// symmetric about T/2 the centered offset is taken from the mirrored pair so
/// psi' is exactly antisymmetric and sums to zero.
struct TimeWeights {
  std::vector<double> psi, dpsi;
};

inline TimeWeights time_weights(const SpaceTimeField& st, const TestFunction& phi) {
  const auto t = st.times();
  const std::size_t M = t.size() - 1;
  const double dt = st.dt();
  bool symmetric = true;
  for (std::size_t m = 0; m <= M; ++m) {
    if (std::abs(t[m] + t[M - m] - phi.horizon()) > 1e-12 * phi.horizon()) symmetric = false;
  }
  TimeWeights w;
  for (std::size_t m = 0; m <= M; ++m) {
    const double c = symmetric ? 0.5 * (t[m] - t[M - m]) / (phi.horizon() - 2.0 * phi.margin()) : phi.centered(t[m]);
    w.psi.push_back(dt * TestFunction::psi_centered(c));
    w.dpsi.push_back(dt * phi.dpsi_centered(c));
  }
  return w;
}

/// Sum of a[m] pairing m with M - m; exact cancellation for antisymmetric
/// weights times time-constant data.
template <class T>
T paired_sum(const std::vector<T>& a) {
  T s{};
  const std::size_t M = a.size() - 1;
  for (std::size_t m = 0; m < M - m; ++m) s += a[m] + a[M - m];
  if (M % 2 == 0) s += a[M / 2];
  return s;
}

inline Complex mean_product(std::span<const Complex> a, std::span<const double> b) {
  Complex s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s / static_cast<double>(a.size());
}

inline void check_margin(double eps, const TestFunction& phi) {
  if (eps > phi.margin()) {
    throw SupportMarginError("mollifier scale " + std::to_string(eps) + " exceeds the test-function margin " +
                             std::to_string(phi.margin()));
  }
}
}  // namespace detail

/// theta^eps u^eps - (theta u)^eps componentwise.
inline VectorField commutator_field(const ScalarField& theta, const VectorField& u, const Mollifier& m) {
  require_same_grid(theta.grid(), u.grid(), "commutator_field");
  const auto te = mollify(theta, m);
  std::vector<ScalarField> out;
  for (const auto& c : u.components()) {
    auto prod = pointwise(te, mollify(c, m));
    prod -= mollify(pointwise(theta, c), m);
    out.push_back(std::move(prod));
  }
  return VectorField(std::move(out));
}

inline VectorField commutator_field(const ScalarField& theta, const VectorField& u, double eps) {
  return commutator_field(theta, u, build_mollifier(theta.grid(), eps));
}

/// Per-snapshot quantities at one mollification scale, shared across exponents.
///   A = (theta^eps - theta)(u^eps - u)
///   r = (theta u)^eps - theta^eps u - theta u^eps + theta u
/// so the commutator is C = A - r.
struct CommutatorState {
  ScalarField theta_eps;
  VectorField u_eps;
  VectorField A;
  VectorField r;
  ScalarField div_C;
};

inline CommutatorState commutator_state(const ScalarField& theta, const VectorField& u, const Mollifier& m) {
  require_same_grid(theta.grid(), u.grid(), "commutator_state");
  const auto& g = theta.grid();
  if (u.size() != static_cast<std::size_t>(g.dim())) throw ArgumentError("commutator_state: u needs d components");
  CommutatorState s;
  s.theta_eps = mollify(theta, m);
  const auto dtheta = s.theta_eps - theta;
  std::vector<ScalarField> ue, A, r;
  auto divC = Spectrum::zeros(g);
  for (int a = 0; a < g.dim(); ++a) {
    const auto& c = u[static_cast<std::size_t>(a)];
    auto ce = mollify(c, m);
    const auto tu = pointwise(theta, c);
    auto tu_e = mollify(tu, m);
    A.push_back(pointwise(dtheta, ce - c));
    auto ra = tu_e - pointwise(s.theta_eps, c) - pointwise(theta, ce) + tu;
    auto Ca = pointwise(s.theta_eps, ce) - tu_e;
    divC += derivative(transform(Ca), a);
    r.push_back(std::move(ra));
    ue.push_back(std::move(ce));
  }
  s.u_eps = VectorField(std::move(ue));
  s.A = VectorField(std::move(A));
  s.r = VectorField(std::move(r));
  s.div_C = inverse(divC, true);
  return s;
}

/// Spatial integrals at one time.
struct ResidualTerms {
  Complex R{};
  Complex I1{}, I2{}, J1{}, J2{};

  ResidualTerms& operator+=(const ResidualTerms& o) {
    R += o.R;
    I1 += o.I1;
    I2 += o.I2;
    J1 += o.J1;
    J2 += o.J2;
    return *this;
  }
  ResidualTerms operator*(double c) const { return {R * c, I1 * c, I2 * c, J1 * c, J2 * c}; }
  ResidualTerms operator+(const ResidualTerms& o) const {
    ResidualTerms t = *this;
    return t += o;
  }
  [[nodiscard]] Complex split_sum() const { return I1 + I2 + J1 + J2; }
};

/// R = int div(C) W chi with W = z |theta^eps|^{z-1} sgn theta^eps, and its
/// split after integrating by parts against G = grad(W chi):
///   I1 = -int A.W grad chi,  I2 = -int A.(G - W grad chi),
///   J1 =  int r.W grad chi,  J2 =  int r.(G - W grad chi).
/// G is the spectral gradient, so I1 + I2 + J1 + J2 = R up to roundoff.
inline ResidualTerms spatial_residual(const CommutatorState& s, Complex z, const TestFunction& phi) {
  check_weight_exponent(z);
  const auto& g = s.theta_eps.grid();
  const std::size_t N = g.size();
  const auto& chi = phi.chi();
  const auto& gchi = phi.grad_chi();
  // W chi split into real and imaginary fields for the real transforms
  std::vector<double> wr(N), wi(N), gr(N), gi(N);
  std::vector<Complex> w(N);
  for (std::size_t i = 0; i < N; ++i) {
    w[i] = renorm_weight(s.theta_eps[i], z);
    const double c = chi ? (*chi)[i] : 1.0;
    wr[i] = w[i].real() * c;
    wi[i] = w[i].imag() * c;
  }
  const ScalarField Wr(g, std::move(wr)), Wi(g, std::move(wi));
  ResidualTerms t;
  {
    Complex acc{};
    for (std::size_t i = 0; i < N; ++i) acc += s.div_C[i] * Complex{Wr[i], Wi[i]};
    t.R = acc / static_cast<double>(N);
  }
  const auto sr = transform(Wr);
  const auto si = transform(Wi);
  for (int a = 0; a < g.dim(); ++a) {
    const auto ax = static_cast<std::size_t>(a);
    const auto Gr = inverse(derivative(sr, a));
    const auto Gi = inverse(derivative(si, a));
    const auto& A = s.A[ax];
    const auto& r = s.r[ax];
    Complex a1{}, a2{}, b1{}, b2{};
    for (std::size_t i = 0; i < N; ++i) {
      const Complex G{Gr[i], Gi[i]};
      const Complex H = gchi ? w[i] * (*gchi)[ax][i] : Complex{};
      a1 += A[i] * H;
      a2 += A[i] * (G - H);
      b1 += r[i] * H;
      b2 += r[i] * (G - H);
    }
    t.I1 -= a1;
    t.I2 -= a2;
    t.J1 += b1;
    t.J2 += b2;
  }
  const double inv = 1.0 / static_cast<double>(N);
  t.I1 *= inv;
  t.I2 *= inv;
  t.J1 *= inv;
  t.J2 *= inv;
  return t;
}

namespace detail {
inline void check_residual_args(const SpaceTimeField& st, double eps, const TestFunction& phi) {
  if (!st.has_velocity()) throw ArgumentError("residual needs a velocity field");
  check_margin(eps, phi);
  if (phi.chi()) require_same_grid(phi.chi()->grid(), st.grid(), "test function");
}

/// Time integral of spatial residuals at several exponents for one scale.
inline std::vector<ResidualTerms> residual_terms(const SpaceTimeField& st, double eps, std::span<const Complex> zs,
                                                 const TestFunction& phi) {
  check_residual_args(st, eps, phi);
  for (auto z : zs) check_weight_exponent(z);
  const auto mol = build_mollifier(st.grid(), eps);
  const auto w = time_weights(st, phi);
  std::vector<ResidualTerms> out(zs.size());
  if (st.is_frozen()) {
    const auto s = commutator_state(st.theta(0), st.u(0), mol);
    const double psum = paired_sum(w.psi);
    for (std::size_t j = 0; j < zs.size(); ++j) out[j] = spatial_residual(s, zs[j], phi) * psum;
    return out;
  }
  for (std::size_t m = 0; m < st.samples(); ++m) {
    if (w.psi[m] == 0.0) continue;
    const auto s = commutator_state(st.theta(m), st.u(m), mol);
    for (std::size_t j = 0; j < zs.size(); ++j) out[j] += spatial_residual(s, zs[j], phi) * w.psi[m];
  }
  return out;
}
}  // namespace detail

/// Space-time residual and its four-way split.
inline ResidualTerms residual_split(const SpaceTimeField& st, double eps, Complex z, const TestFunction& phi) {
  const Complex zs[] = {z};
  return detail::residual_terms(st, eps, zs, phi)[0];
}

/// R^eps = int int div(theta^eps u^eps - (theta u)^eps) z |theta^eps|^{z-1} sgn theta^eps phi.
inline Complex residual_R(const SpaceTimeField& st, double eps, Complex z, const TestFunction& phi) {
  return residual_split(st, eps, z, phi).R;
}

namespace detail {
/// -int int |f|^z (d_t phi + v . grad phi) for per-time f and v.
template <class Snapshot>
Complex weak_residual(const SpaceTimeField& st, Complex z, const TestFunction& phi, Snapshot&& snapshot) {
  if (!(z.real() > 0.0)) throw DomainError("weak residual needs Re z > 0");
  if (phi.chi()) require_same_grid(phi.chi()->grid(), st.grid(), "test function");
  const auto w = time_weights(st, phi);
  const auto& chi = phi.chi();
  const auto& gchi = phi.grad_chi();
  auto spatial = [&](std::size_t m) {
    const auto [f, v] = snapshot(m);
    const auto p = abs_power(f, z);
    std::pair<Complex, Complex> xy{};
    if (!chi) {
      Complex s{};
      for (auto c : p) s += c;
      xy.first = s / static_cast<double>(p.size());
      return xy;
    }
    xy.first = mean_product(p, chi->values());
    if (!v) throw ArgumentError("weak residual with a nonconstant chi needs a velocity field");
    std::vector<double> ugc(p.size(), 0.0);
    for (std::size_t a = 0; a < v->size(); ++a)
      for (std::size_t i = 0; i < p.size(); ++i) ugc[i] += (*v)[a][i] * (*gchi)[a][i];
    xy.second = mean_product(p, ugc);
    return xy;
  };
  std::vector<Complex> terms(st.samples());
  if (st.is_frozen()) {
    const auto [x, y] = spatial(0);
    for (std::size_t m = 0; m < terms.size(); ++m) terms[m] = w.dpsi[m] * x + w.psi[m] * y;
  } else {
    for (std::size_t m = 0; m < terms.size(); ++m) {
      if (w.psi[m] == 0.0 && w.dpsi[m] == 0.0) continue;
      const auto [x, y] = spatial(m);
      terms[m] = w.dpsi[m] * x + w.psi[m] * y;
    }
  }
  return -paired_sum(terms);
}
}  // namespace detail

/// F(z) = -int int |theta|^z (d_t phi + u . grad phi).
inline Complex weak_residual_F(const SpaceTimeField& st, Complex z, const TestFunction& phi) {
  return detail::weak_residual(st, z, phi, [&](std::size_t m) {
    const VectorField* v = st.has_velocity() ? &st.u(m) : nullptr;
    return std::pair<const ScalarField&, const VectorField*>(st.theta(m), v);
  });
}

/// F_eps(z) = -int int |theta^eps|^z (d_t phi + u^eps . grad phi). For an
/// exact solution this equals R^eps.
inline Complex mollified_weak_residual(const SpaceTimeField& st, double eps, Complex z, const TestFunction& phi) {
  detail::check_margin(eps, phi);
  check_weight_exponent(z);
  const auto mol = build_mollifier(st.grid(), eps);
  ScalarField te;
  std::optional<VectorField> ue;
  return detail::weak_residual(st, z, phi, [&](std::size_t m) {
    te = mollify(st.theta(m), mol);
    if (st.has_velocity()) ue = mollify(st.u(m), mol);
    return std::pair<const ScalarField&, const VectorField*>(te, ue ? &*ue : nullptr);
  });
}

/// Scale for weak residuals: int |psi'| dt times max_t int |theta|^{Re z} dx.
inline double weak_residual_scale(const SpaceTimeField& st, Complex z, const TestFunction& phi) {
  const auto w = detail::time_weights(st, phi);
  double tv = 0.0;
  for (double d : w.dpsi) tv += std::abs(d);
  double mz = 0.0;
  for (std::size_t m = 0; m < st.snapshots(); ++m) {
    double s = 0.0;
    for (double v : st.theta(m).values()) s += std::pow(std::abs(v), z.real());
    mz = std::max(mz, s / static_cast<double>(st.grid().size()));
  }
  return tv * mz;
}

/// int |f|^r dx.
inline double lr_norm_to_r(const ScalarField& f, double r) {
  double s = 0.0;
  for (double v : f.values()) s += std::pow(std::abs(v), r);
  return s / static_cast<double>(f.size());
}

struct ConservationSeries {
  double r = 0.0;
  std::vector<double> values;
  /// max_t |M(t) - M(0)| / M(0); 0 when M(0) = 0.
  double max_relative_drift = 0.0;
};

inline std::vector<ConservationSeries> conservation_report(const SpaceTimeField& st, std::span<const double> r_list) {
  std::vector<ConservationSeries> out;
  for (double r : r_list) {
    if (!(r >= 1.0)) throw ArgumentError("conservation_report: r must be >= 1");
    ConservationSeries s;
    s.r = r;
    for (std::size_t m = 0; m < st.samples(); ++m) s.values.push_back(lr_norm_to_r(st.theta(m), r));
    const double m0 = s.values.front();
    for (double v : s.values) s.max_relative_drift = std::max(s.max_relative_drift, m0 > 0.0 ? std::abs(v - m0) / m0 : 0.0);
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweep driver

/// 2 alpha + beta - 1 - d (Re z - 2)/p.
inline double commutator_exponent(double alpha, double beta, int d, double p, Complex z) {
  return 2.0 * alpha + beta - 1.0 - d * (z.real() - 2.0) / p;
}

struct CommutatorSweepRow {
  double eps = 0.0;
  Complex z{};
  ResidualTerms terms;
  Complex F_eps{};
};

struct CommutatorFit {
  Complex z{};
  RateFit fit;
  double predicted_exponent = 0.0;
  bool pass = false;
  /// max over eps of |I1 + I2 + J1 + J2 - R| / |R|.
  double split_defect = 0.0;
};

struct CommutatorSweep {
  std::vector<CommutatorSweepRow> rows;
  std::vector<CommutatorFit> fits;
};

struct CommutatorSweepOptions {
  double p = 3.0;
  double alpha = 0.0;
  double beta = 0.0;
  double slope_tolerance = 0.1;
  double min_r_squared = 0.95;
  bool with_weak_residual = true;
};

inline CommutatorSweep commutator_sweep(const SpaceTimeField& st, std::span<const double> eps_list,
                                        std::span<const Complex> z_list, const TestFunction& phi,
                                        const CommutatorSweepOptions& opt) {
  check_sweep(eps_list);
  for (auto z : z_list) check_weight_exponent(z);
  for (double e : eps_list) detail::check_margin(e, phi);
  CommutatorSweep sw;
  std::vector<std::vector<double>> mags(z_list.size());
  std::vector<double> split(z_list.size(), 0.0);
  for (double eps : eps_list) {
    const auto terms = detail::residual_terms(st, eps, z_list, phi);
    for (std::size_t j = 0; j < z_list.size(); ++j) {
      CommutatorSweepRow row{eps, z_list[j], terms[j], {}};
      if (opt.with_weak_residual) row.F_eps = mollified_weak_residual(st, eps, z_list[j], phi);
      mags[j].push_back(std::abs(terms[j].R));
      if (std::abs(terms[j].R) > 0.0) {
        split[j] = std::max(split[j], std::abs(terms[j].split_sum() - terms[j].R) / std::abs(terms[j].R));
      }
      sw.rows.push_back(row);
    }
  }
  for (std::size_t j = 0; j < z_list.size(); ++j) {
    CommutatorFit f;
    f.z = z_list[j];
    f.fit = fit_rate(eps_list, mags[j]);
    f.predicted_exponent = commutator_exponent(opt.alpha, opt.beta, st.grid().dim(), opt.p, z_list[j]);
    f.split_defect = split[j];
    f.pass = !f.fit.degenerate && f.fit.slope >= f.predicted_exponent - opt.slope_tolerance &&
             f.fit.r_squared >= opt.min_r_squared;
    sw.fits.push_back(f);
  }
  return sw;
}

/// Columns eps, re_z, im_z, abs_R, I1, I2, J1, J2, abs_F_eps (split terms as real parts).
inline void write_sweep_csv(std::ostream& os, const CommutatorSweep& sw) {
  char buf[512];
  os << "eps,re_z,im_z,abs_R,I1,I2,J1,J2,abs_F_eps\n";
  for (const auto& r : sw.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.eps, r.z.real(),
                  r.z.imag(), std::abs(r.terms.R), r.terms.I1.real(), r.terms.I2.real(), r.terms.J1.real(),
                  r.terms.J2.real(), std::abs(r.F_eps));
    os << buf;
  }
}

}  // namespace renorm
