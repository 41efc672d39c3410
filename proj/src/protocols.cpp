#include "squeeze/protocols.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include <boost/math/tools/minima.hpp>

namespace squeeze {

using Eigen::MatrixXd;

namespace {

constexpr int kBrentBits = 24;  // ~1e-7 relative on the bracket
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class F>
double argmin(F fn, double lo, double hi) {
  std::uintmax_t iters = 200;
  return boost::math::tools::brent_find_minima(fn, lo, hi, kBrentBits, iters).first;
}

// coarse grid to pick the basin, then Brent inside the neighbouring cells
template <class F>
double argmin_global(F fn, double lo, double hi, int grid = 24) {
  const double d = (hi - lo) / grid;
  int best = 0;
  double fb = fn(lo + 0.5 * d);
  for (int i = 1; i < grid; ++i) {
    const double v = fn(lo + (i + 0.5) * d);
    if (v < fb) {
      fb = v;
      best = i;
    }
  }
  const double c = lo + (best + 0.5) * d;
  return argmin(fn, c - d, c + d);
}

GaussianState rotate(const GaussianState& s, double theta) { return apply_symplectic(s, rotation_map(s, theta)); }

double min_eig2(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m.topLeftCorner<2, 2>());
  return es.eigenvalues()(0);
}

}  // namespace

Protocol parse_protocol(const std::string& name) {
  if (name == "qnd") return Protocol::qnd;
  if (name == "double_pass" || name == "double-pass") return Protocol::double_pass;
  if (name == "eraser") return Protocol::eraser;
  if (name == "phase_matching" || name == "phase-matching" || name == "pm") return Protocol::phase_matching;
  throw std::invalid_argument("unknown protocol: " + name);
}

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::qnd: return "qnd";
    case Protocol::double_pass: return "double_pass";
    case Protocol::eraser: return "eraser";
    case Protocol::phase_matching: return "phase_matching";
  }
  return "?";
}

Target parse_target(const std::string& name) {
  if (name == "scs") return Target::scs;
  if (name == "yurke") return Target::yurke;
  if (name == "half_yurke") return Target::half_yurke;
  throw std::invalid_argument("unknown target: " + name);
}

std::string to_string(Target t) {
  switch (t) {
    case Target::scs: return "scs";
    case Target::yurke: return "yurke";
    case Target::half_yurke: return "half_yurke";
  }
  return "?";
}

const EmbeddedBasis& scs_target_basis(double f) {
  thread_local std::map<int, EmbeddedBasis> cache;
  const int key = static_cast<int>(std::lround(2 * f));
  auto it = cache.find(key);
  if (it == cache.end()) {
    const SpinSystem sys = spin_matrices(f);
    it = cache.emplace(key, build_embedded_basis(prepare_fiducial(Prep::scs, sys), sys)).first;
  }
  return it->second;
}

double to_db(double zeta) { return -10.0 * std::log10(zeta); }

Observables observables(const GaussianState& s) {
  Observables o;
  o.var_du = s.sigma(0, 0);
  if (s.atomic_modes == 2) {
    o.var_wd = s.sigma(2, 2);
    o.cov = s.sigma(0, 2);
  }
  o.pops = s.pops;
  return o;
}

double zeta_for_target(const Observables& o, const EmbeddedBasis& t, bool keep_transfer) {
  const double f = t.f;
  const double nu = o.pops(0), nd = o.pops(1), nw = o.pops(2);
  const double v = t.v_up, w = t.w_up;
  double num, fx;
  if (keep_transfer) {
    num = (nu + nd + nw) * (v * v * o.var_du + 2 * v * w * o.cov + w * w * o.var_wd);
    fx = t.fx_up * nu + t.fx_down * nd + t.fx_wr * nw;
  } else {
    num = (nu + nd) * (v * v * o.var_du + w * w * nd / 2);
    fx = t.fx_up * nu + t.fx_down * nd;
  }
  if (fx * fx < 1e-300) return kInf;
  return 2 * f * num / (fx * fx);
}

ZetaResult squeezing_parameter(const Observables& o, Target target, double f, bool keep_transfer,
                               std::optional<double> alpha) {
  ZetaResult r;
  if (target == Target::scs) {
    r.zeta = zeta_for_target(o, scs_target_basis(f), keep_transfer);
    return r;
  }
  const SpinSystem sys = spin_matrices(f);
  const Prep prep = target == Target::yurke ? Prep::yurke : Prep::half_yurke;
  auto eval = [&](double a) {
    try {
      return zeta_for_target(o, build_embedded_basis(prepare_fiducial(prep, sys, a), sys), keep_transfer);
    } catch (const NoCoupledState&) {
      return kInf;  // α → 0 limit of the Yurke family
    }
  };
  const double a = alpha ? *alpha : argmin_global(eval, 1e-9, std::numbers::pi / 2 - 1e-9);
  r.alpha = a;
  r.zeta = std::sin(a) == 0.0 ? kInf : eval(a);
  if (!std::isfinite(r.zeta)) r.diagnostic = "alpha gives a vanishing mean spin; squeezing parameter diverges";
  return r;
}

ProtocolContext make_context(const CVec& up, const ProtocolParams& params, std::optional<bool> keep_transfer) {
  params.validate();
  ProtocolContext c;
  c.params = params;
  c.sys = spin_matrices(params.f);
  c.sys.g_f = params.lande();
  c.basis = build_embedded_basis(up, c.sys);
  const auto diag = coherence_diagnostics(c.basis, c.sys);
  c.keep_transfer = c.basis.has_transfer() && keep_transfer.value_or(diag.keep_transfer);
  c.updates = build_updates(c.basis, c.sys, PumpModel{}, params.step, c.keep_transfer);
  const double chi = params.chi();
  c.xi_up = chi * chi * c.basis.var_up;
  c.xi_down = chi * chi * std::max(c.basis.var_down - c.basis.var_up, 0.0);
  c.n_step = params.photons_per_step();
  return c;
}

ProtocolContext make_context(Prep prep, const ProtocolParams& params, std::optional<bool> keep_transfer,
                             std::optional<double> alpha) {
  params.validate();
  SpinSystem sys = spin_matrices(params.f);
  sys.g_f = params.lande();
  return make_context(prepare_fiducial(prep, sys, alpha), params, keep_transfer);
}

GaussianState initial_state(const ProtocolContext& ctx) {
  return vacuum_state(ctx.params.n_atoms, ctx.n_step, ctx.keep_transfer ? 2 : 1);
}

GaussianState pump_step(const GaussianState& s, const PumpUpdates& u) {
  const int na = u.modes() * 2;
  if (na != 2 * s.atomic_modes) throw std::invalid_argument("pump_step: mode count mismatch");
  MatrixXd m = MatrixXd::Identity(s.dim(), s.dim());
  MatrixXd n = MatrixXd::Zero(s.dim(), s.dim());
  m.topLeftCorner(na, na) = u.m_a;
  n.topLeftCorner(na, na) = u.noise(s.pops);
  GaussianState out = s;
  out.sigma = m * s.sigma * m.transpose() + n;
  out.pops = u.j * s.pops;
  return out;
}

GaussianState faraday_step(const GaussianState& s, const ProtocolContext& ctx) {
  return apply_symplectic(s, faraday_population(ctx.xi_up, ctx.xi_down, s.pops, ctx.n_step, s.atomic_modes));
}

namespace {

GaussianState maybe_pump(const GaussianState& s, const ProtocolContext& ctx) {
  return ctx.params.pumping ? pump_step(s, ctx.updates) : s;
}

}  // namespace

GaussianState qnd_step(const GaussianState& s, const ProtocolContext& ctx) {
  GaussianState x = faraday_step(maybe_pump(s, ctx), ctx);
  x = homodyne_update(x, "X_y");
  return append_fresh_light(x, ctx.n_step);
}

GaussianState double_pass_step(const GaussianState& s, const ProtocolContext& ctx, bool eraser) {
  GaussianState x = faraday_step(maybe_pump(s, ctx), ctx);
  x = apply_symplectic(x, waveplate_map(x));
  x = faraday_step(maybe_pump(x, ctx), ctx);
  x = eraser ? homodyne_update(x, "X'_y") : partial_trace(x, x.atomic_modes);
  return append_fresh_light(x, ctx.n_step);
}

GaussianState coherent_qnd(const GaussianState& s, double xi) {
  GaussianState x = apply_symplectic(s, faraday_unit(xi));
  return append_fresh_light(homodyne_update(x, "X_y"), 1);
}

GaussianState coherent_double_pass(const GaussianState& s, double xi, bool eraser) {
  GaussianState x = apply_symplectic(s, faraday_unit(xi));
  x = apply_symplectic(x, waveplate_map(x));
  x = apply_symplectic(x, faraday_unit(xi));
  x = eraser ? homodyne_update(x, "X'_y") : partial_trace(x, 1);
  return append_fresh_light(x, 1);
}

GaussianState coherent_phase_matching(double xi_total, int n) {
  GaussianState s = unit_vacuum();
  const double theta = xi_total / (2.0 * n);
  for (int k = 0; k < n; ++k) s = coherent_double_pass(rotate(s, theta), xi_total / n, true);
  return s;
}

double quadrature_zeta(const GaussianState& s) {
  const double w = s.commutator_weights()(0);
  return 2 * min_eig2(s.sigma) / w;
}

void Trajectory::push(double time, const Observables& o, double z, double zd, double zq) {
  t.push_back(time);
  var_du.push_back(o.var_du);
  var_wd.push_back(o.var_wd);
  cov.push_back(o.cov);
  n_up.push_back(o.pops(0));
  n_down.push_back(o.pops(1));
  n_wr.push_back(o.pops(2));
  zeta_m.push_back(z);
  zeta_drop.push_back(zd);
  zeta_q.push_back(zq);
}

std::size_t Trajectory::peak_index() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < zeta_m.size(); ++i)
    if (zeta_m[i] < zeta_m[best]) best = i;
  return best;
}

double Trajectory::peak_db() const { return zeta_m.empty() ? 0.0 : to_db(zeta_m[peak_index()]); }

double Trajectory::peak_time() const { return t.empty() ? 0.0 : t[peak_index()]; }

void Trajectory::write_csv(std::ostream& os) const {
  os << "t,varXdu,varXwd,cov,N_up,N_down,N_wr,zeta_m,zeta_m_dB,zeta_drop,zeta_q\n";
  os.precision(12);
  for (std::size_t i = 0; i < t.size(); ++i)
    os << t[i] << ',' << var_du[i] << ',' << var_wd[i] << ',' << cov[i] << ',' << n_up[i] << ',' << n_down[i]
       << ',' << n_wr[i] << ',' << zeta_m[i] << ',' << to_db(zeta_m[i]) << ',' << zeta_drop[i] << ','
       << zeta_q[i] << '\n';
}

namespace {

struct Recorder {
  const ProtocolContext& ctx;
  const SimulateOptions& opt;
  bool readout_rotation;

  double zeta(const GaussianState& s, bool keep) const {
    const Observables o = observables(s);
    return squeezing_parameter(o, opt.target, ctx.params.f, keep, opt.alpha).zeta;
  }

  // minimum over a readout rotation φ of the atomic phase plane
  double best(const GaussianState& s, bool keep) const {
    if (!readout_rotation) return zeta(s, keep);
    auto fn = [&](double phi) { return zeta(rotate(s, phi), keep); };
    return fn(argmin_global(fn, -std::numbers::pi / 2, std::numbers::pi / 2));
  }

  void record(Trajectory& tr, double t, const GaussianState& s) const {
    const double zd = best(s, false);
    const double z = ctx.keep_transfer ? best(s, true) : zd;
    tr.push(t, observables(s), z, zd, quadrature_zeta(s));
  }
};

}  // namespace

Trajectory phase_matching_run(const ProtocolContext& ctx, int n_steps, const SimulateOptions& opt) {
  if (n_steps < 1) throw std::invalid_argument("phase_matching_run: n_steps >= 1");
  Recorder rec{ctx, opt, true};
  Trajectory tr;
  GaussianState s = initial_state(ctx);
  rec.record(tr, 0.0, s);
  const double h = ctx.params.step;
  for (int k = 1; k <= n_steps; ++k) {
    auto crit = [&](double th) { return min_eig2(double_pass_step(rotate(s, th), ctx, true).sigma); };
    const double th = argmin_global(crit, -std::numbers::pi / 2, std::numbers::pi / 2);
    s = double_pass_step(rotate(s, th), ctx, true);
    if (k % opt.record_every == 0 || k == n_steps) rec.record(tr, 2 * h * k, s);
  }
  return tr;
}

Trajectory simulate(Protocol protocol, const ProtocolContext& ctx, double t_max, const SimulateOptions& opt) {
  const double h = ctx.params.step;
  if (protocol == Protocol::phase_matching) {
    const int n = std::max(1, static_cast<int>(std::lround(t_max / (2 * h))));
    return phase_matching_run(ctx, n, opt);
  }
  Recorder rec{ctx, opt, protocol != Protocol::qnd};
  Trajectory tr;
  GaussianState s = initial_state(ctx);
  rec.record(tr, 0.0, s);
  const double dt = protocol == Protocol::qnd ? h : 2 * h;
  const int n = std::max(1, static_cast<int>(std::lround(t_max / dt)));
  for (int k = 1; k <= n; ++k) {
    if (protocol == Protocol::qnd)
      s = qnd_step(s, ctx);
    else
      s = double_pass_step(s, ctx, protocol == Protocol::eraser);
    if (k % opt.record_every == 0 || k == n) rec.record(tr, dt * k, s);
  }
  return tr;
}

Trajectory simulate(Protocol protocol, Prep prep, const ProtocolParams& params, double t_max,
                    const SimulateOptions& opt) {
  return simulate(protocol, make_context(prep, params, opt.keep_transfer), t_max, opt);
}

}  // namespace squeeze
