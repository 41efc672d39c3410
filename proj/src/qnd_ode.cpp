#include "squeeze/qnd_ode.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <boost/numeric/odeint.hpp>
#include <gsl/gsl_multimin.h>
#include <json.hpp>
#include <tbb/parallel_for.h>

#include "squeeze/optical_pumping.hpp"

namespace squeeze {

using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace odeint = boost::numeric::odeint;

namespace {

using StateVec = std::vector<double>;

double expect(const CVec& psi, const CMat& op) { return psi.dot(op * psi).real(); }

void unpack(const StateVec& y, const OdeCoefficients& c, OdeState& s) {
  const int n = c.n_ops;
  s.cov = Eigen::Map<const MatrixXd>(y.data(), n, n);
  s.pops = Eigen::Map<const VectorXd>(y.data() + n * n, c.n_pops);
}

StateVec pack(const OdeState& s) {
  StateVec y(s.cov.size() + s.pops.size());
  Eigen::Map<MatrixXd>(y.data(), s.cov.rows(), s.cov.cols()) = s.cov;
  Eigen::Map<VectorXd>(y.data() + s.cov.size(), s.pops.size()) = s.pops;
  return y;
}

Observables ode_observables(const OdeState& s) {
  Observables o;
  o.var_du = s.cov(0, 0);
  if (s.cov.rows() > 2) {
    o.var_wd = s.cov(2, 2);
    o.cov = s.cov(0, 2);
  }
  for (int i = 0; i < s.pops.size(); ++i) o.pops(i) = s.pops(i);
  return o;
}

}  // namespace

OdeCoefficients ode_coefficients(const CVec& up, const ProtocolParams& params) {
  OdeCoefficients c;
  SpinSystem sys = spin_matrices(params.f);
  sys.g_f = params.lande();
  c.basis = build_embedded_basis(up / up.norm(), sys);
  const QutritOperators q = qutrit_operators(c.basis, true);
  const PumpTables t = coefficient_tables(c.basis, sys, PumpModel{}, true);
  c.n_ops = static_cast<int>(q.ops.size());
  c.n_pops = static_cast<int>(q.pops.size());
  c.drift = t.drift;
  c.noise = t.noise;
  c.pop = t.pop;
  c.v = c.basis.v_up;
  c.w = c.basis.has_transfer() ? c.basis.w_up : 0.0;
  c.kappa = params.kappa();
  c.gamma_s = params.pumping ? 1.0 : 0.0;

  const int n = c.n_ops, p = c.n_pops;
  CMat fprime = c.v * q.ops[0];
  if (n > 2) fprime += c.w * q.ops[2];
  std::vector<CMat> h(n);
  for (int a = 0; a < n; ++a) h[a] = cd(0, -1) * (fprime * q.ops[a] - q.ops[a] * fprime);
  c.mean_h.resize(n, p);
  for (int a = 0; a < n; ++a)
    for (int s = 0; s < p; ++s) c.mean_h(a, s) = expect(q.states[s], h[a]);
  c.conn.assign(p, MatrixXd::Zero(n, n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const CMat ac = h[a] * h[b] + h[b] * h[a];
      for (int s = 0; s < p; ++s)
        c.conn[s](a, b) = expect(q.states[s], ac) - 2 * c.mean_h(a, s) * c.mean_h(b, s);
    }
  c.double_comm.resize(n, n);
  for (int a = 0; a < n; ++a) {
    const CMat inner = q.ops[a] * fprime - fprime * q.ops[a];
    const CMat dc = fprime * inner - inner * fprime;
    for (int b = 0; b < n; ++b) c.double_comm(a, b) = (dc * q.ops[b]).trace().real();
  }
  return c;
}

OdeState ode_initial_state(const OdeCoefficients& c, double n_atoms) {
  const QutritOperators q = qutrit_operators(c.basis, true);
  const int n = c.n_ops;
  OdeState s;
  s.cov.resize(n, n);
  const CVec& up = c.basis.up;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      s.cov(a, b) = n_atoms * (0.5 * expect(up, q.ops[a] * q.ops[b] + q.ops[b] * q.ops[a]) -
                               expect(up, q.ops[a]) * expect(up, q.ops[b]));
  s.pops = VectorXd::Zero(c.n_pops);
  s.pops(0) = n_atoms;
  return s;
}

MatrixXd covariance_rhs(const OdeState& s, const OdeCoefficients& c) {
  const int n = c.n_ops;
  VectorXd sel = VectorXd::Zero(n);
  sel(0) = c.v;
  if (n > 2) sel(2) = c.w;
  const VectorXd u = s.cov * sel;
  MatrixXd d = -c.kappa * u * u.transpose();
  const VectorXd hbar = c.mean_h * s.pops;
  MatrixXd ac = 2 * hbar * hbar.transpose();
  for (int q = 0; q < c.n_pops; ++q) ac += s.pops(q) * c.conn[q];
  d += c.kappa / 8 * ac;
  MatrixXd pump = c.drift * s.cov + s.cov * c.drift.transpose();
  for (int q = 0; q < c.n_pops; ++q) pump += s.pops(q) * c.noise[q];
  d += c.gamma_s * pump;
  return d;
}

VectorXd population_rhs(const OdeState& s, const OdeCoefficients& c) {
  return c.gamma_s * (c.pop.transpose() * s.pops);
}

OdeResult integrate(const CVec& up, const ProtocolParams& params, const OdeOptions& opt) {
  const OdeCoefficients c = ode_coefficients(up, params);
  const OdeState s0 = ode_initial_state(c, params.n_atoms);
  const int n = c.n_ops;
  const bool has_transfer = n > 2;
  const double f = params.f;

  auto rhs = [&c](const StateVec& y, StateVec& dy, double) {
    OdeState s;
    unpack(y, c, s);
    const MatrixXd dc = covariance_rhs(s, c);
    const VectorXd dn = population_rhs(s, c);
    dy.resize(y.size());
    Eigen::Map<MatrixXd>(dy.data(), c.n_ops, c.n_ops) = dc;
    Eigen::Map<VectorXd>(dy.data() + c.n_ops * c.n_ops, c.n_pops) = dn;
  };

  OdeResult r;
  auto record = [&](double t, const StateVec& y) {
    OdeState s;
    unpack(y, c, s);
    const Observables o = ode_observables(s);
    const double zd = squeezing_parameter(o, opt.target, f, false).zeta;
    const double zk = has_transfer ? squeezing_parameter(o, opt.target, f, true).zeta
                                   : std::numeric_limits<double>::infinity();
    const double z = std::min(zk, zd);
    r.traj.push(t, o, z, zd, 2 * s.cov(0, 0) / std::max(s.pops(0) - s.pops(1), 1e-300));
    r.zeta_keep.push_back(zk);
    r.peak_keep_db = std::max(r.peak_keep_db, to_db(zk));
    r.peak_drop_db = std::max(r.peak_drop_db, to_db(zd));
    const MatrixXd dc = covariance_rhs(s, c);
    const MatrixXd dropped = c.kappa / 8 * (s.cov * c.double_comm + c.double_comm.transpose() * s.cov);
    const double nd = dc.cwiseAbs().maxCoeff();
    if (nd > 0) r.dropped_terms_ratio = std::max(r.dropped_terms_ratio, dropped.cwiseAbs().maxCoeff() / nd);
  };

  auto stepper = odeint::make_dense_output(opt.atol, opt.rtol, odeint::runge_kutta_dopri5<StateVec>());
  StateVec y = pack(s0);
  stepper.initialize(y, 0.0, opt.dt_out);
  record(0.0, y);
  const int n_out = static_cast<int>(std::lround(opt.t_max / opt.dt_out));
  int k = 1;
  StateVec yk(y.size());
  while (k <= n_out) {
    const auto [t0, t1] = stepper.do_step(rhs);
    (void)t0;
    ++r.steps;
    if (stepper.current_time_step() < 1e-14) throw NumericalError("integrate: step size underflow (stiff system)");
    bool stop = false;
    while (k <= n_out && k * opt.dt_out <= t1) {
      stepper.calc_state(k * opt.dt_out, yk);
      for (double v : yk)
        if (!std::isfinite(v)) throw NumericalError("integrate: non-finite state");
      record(k * opt.dt_out, yk);
      ++k;
      if (opt.stop_after_peak && to_db(r.traj.zeta_m.back()) < r.traj.peak_db() - 1.0) {
        stop = true;
        break;
      }
    }
    if (stop) break;
  }
  r.peak_db = r.traj.peak_db();
  r.t_peak = r.traj.peak_time();
  return r;
}

OdeResult integrate(Prep prep, const ProtocolParams& params, const OdeOptions& opt) {
  SpinSystem sys = spin_matrices(params.f);
  return integrate(prepare_fiducial(prep, sys), params, opt);
}

Trajectory exact_f1_reference(const ProtocolParams& params, double t_max, double dt_out) {
  if (std::abs(params.f - 1.0) > 1e-12) throw std::invalid_argument("exact_f1_reference requires f = 1");
  const double kap = params.kappa();
  const double g = params.pumping ? 1.0 : 0.0;
  const double na = params.n_atoms;
  using V4 = std::array<double, 4>;
  auto rhs = [&](const V4& y, V4& dy, double) {
    const double var = y[0], n1 = y[1], n0 = y[2], nm = y[3];
    dy[0] = -kap * var * var + g * (-2.0 / 9.0 * var + (n1 + n0 + nm) / 9.0);
    dy[1] = g * (-n1 / 9.0 + n0 / 18.0);
    dy[2] = g * (-2.0 / 9.0 * n0 + (n1 + nm) / 18.0);
    dy[3] = g * (-nm / 9.0 + n0 / 18.0);
  };
  Trajectory tr;
  auto obs = [&](const V4& y, double t) {
    const double fx = na * std::exp(-g * t / 6.0);
    const double ntot = y[1] + y[2] + y[3];
    Observables o;
    o.var_du = y[0];
    o.pops = Eigen::Vector3d(y[1], y[2], y[3]);
    const double z = 2 * ntot * y[0] / (fx * fx);
    tr.push(t, o, z, z, 2 * y[0] / na);
  };
  V4 y = {na / 2, na, 0, 0};
  const int n = static_cast<int>(std::lround(t_max / dt_out));
  odeint::integrate_n_steps(odeint::make_dense_output(1e-6, 1e-10, odeint::runge_kutta_dopri5<V4>()), rhs, y, 0.0,
                            dt_out, n, obs);
  return tr;
}

CVec haar_state(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  CVec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = cd(nd(rng), nd(rng));
  return v / v.norm();
}

double fiducial_peak_db(const CVec& up, const ProtocolParams& params, double t_max, double dt_out, double* t_peak) {
  OdeOptions o;
  o.t_max = t_max;
  o.dt_out = dt_out;
  o.stop_after_peak = true;
  try {
    const OdeResult r = integrate(up / up.norm(), params, o);
    if (t_peak) *t_peak = r.t_peak;
    return r.peak_db;
  } catch (const NoCoupledState&) {
    if (t_peak) *t_peak = 0;
    return 0.0;
  }
}

namespace {

struct Objective {
  const ProtocolParams* params;
  const OptimizeOptions* opt;
  int dim;
};

CVec to_state(const gsl_vector* x, int dim) {
  CVec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = cd(gsl_vector_get(x, 2 * i), gsl_vector_get(x, 2 * i + 1));
  const double n = v.norm();
  return n > 0 ? CVec(v / n) : v;
}

double objective(const gsl_vector* x, void* data) {
  const auto* o = static_cast<const Objective*>(data);
  const CVec v = to_state(x, o->dim);
  if (v.norm() == 0) return 1e3;
  return -fiducial_peak_db(v, *o->params, o->opt->t_max, o->opt->dt_out);
}

SeedReport descend(const ProtocolParams& params, const OptimizeOptions& opt, std::uint64_t seed) {
  const int dim = static_cast<int>(std::lround(2 * params.f)) + 1;
  Objective obj{&params, &opt, dim};
  gsl_multimin_function fn{&objective, static_cast<size_t>(2 * dim), &obj};
  const CVec start = haar_state(dim, seed);
  gsl_vector* x = gsl_vector_alloc(2 * dim);
  gsl_vector* step = gsl_vector_alloc(2 * dim);
  for (int i = 0; i < dim; ++i) {
    gsl_vector_set(x, 2 * i, start(i).real());
    gsl_vector_set(x, 2 * i + 1, start(i).imag());
  }
  gsl_vector_set_all(step, 0.1);
  gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2 * dim);
  gsl_multimin_fminimizer_set(m, &fn, x, step);
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-5) == GSL_SUCCESS) break;
  }
  SeedReport r;
  r.seed = seed;
  r.iterations = it;
  r.state = to_state(gsl_multimin_fminimizer_x(m), dim);
  r.peak_db = fiducial_peak_db(r.state, params, opt.t_max, opt.dt_out, &r.t_peak);
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(x);
  gsl_vector_free(step);
  return r;
}

}  // namespace

OptimizeResult optimize_fiducial(const ProtocolParams& params, const OptimizeOptions& opt) {
  if (opt.n_seeds < 1) throw std::invalid_argument("optimize_fiducial: n_seeds >= 1");
  params.validate();
  OptimizeResult res;
  res.seeds.resize(opt.n_seeds);
  tbb::parallel_for(0, opt.n_seeds, [&](int i) { res.seeds[i] = descend(params, opt, opt.seed + i); });
  res.best = res.seeds[0];
  for (const auto& s : res.seeds)
    if (s.peak_db > res.best.peak_db) res.best = s;
  return res;
}

std::string optimize_report_json(const OptimizeResult& r, const ProtocolParams& params) {
  using nlohmann::json;
  auto seed_json = [](const SeedReport& s) {
    json amps = json::array();
    for (int i = 0; i < s.state.size(); ++i) amps.push_back({s.state(i).real(), s.state(i).imag()});
    return json{{"seed", s.seed},
                {"iterations", s.iterations},
                {"peak_db", s.peak_db},
                {"t_peak_gamma_s", s.t_peak},
                {"amplitudes", amps}};
  };
  json j;
  j["f"] = params.f;
  j["best"] = seed_json(r.best);
  j["seeds"] = json::array();
  for (const auto& s : r.seeds) j["seeds"].push_back(seed_json(s));
  return j.dump(2);
}

}  // namespace squeeze
