#include "squeeze/paraxial.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/laguerre.hpp>
#include <boost/numeric/odeint.hpp>
#include <tbb/parallel_for.h>

#include "squeeze/optical_pumping.hpp"
#include "squeeze/params.hpp"

namespace squeeze {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cplx = std::complex<double>;
namespace odeint = boost::numeric::odeint;
namespace quad = boost::math::quadrature;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuadTol = 1e-9;

double expect(const CVec& psi, const CMat& op) { return psi.dot(op * psi).real(); }

double db(double zeta) { return -10 * std::log10(zeta); }

// e^{2iΦ(z)}
cplx gouy2(const BeamGeometry& b, double z) { return std::polar(1.0, 2.0 * b.gouy(z)); }

}  // namespace

double BeamGeometry::z_r() const { return kPi * w0 * w0 / wavelength; }
double BeamGeometry::area() const { return kPi * w0 * w0 / 2; }
double BeamGeometry::waist(double z) const {
  const double q = z / z_r();
  return w0 * std::sqrt(1 + q * q);
}
double BeamGeometry::gouy(double z) const { return std::atan(z / z_r()); }
double BeamGeometry::curvature_radius(double z) const {
  if (z == 0) return std::numeric_limits<double>::infinity();
  const double zr = z_r();
  return z * (1 + zr * zr / (z * z));
}
double BeamGeometry::sigma0() const { return 3 * wavelength * wavelength / (2 * kPi); }

double CloudGeometry::n_atoms() const {
  return eta0 * std::pow(kPi / 2, 1.5) * sigma_perp * sigma_perp * sigma_z;
}

double CloudGeometry::density(double r, double z) const {
  return eta0 * std::exp(-2 * r * r / (sigma_perp * sigma_perp) - 2 * z * z / (sigma_z * sigma_z));
}

CloudGeometry CloudGeometry::from_atoms(double n_atoms, double eta0, double aspect_ratio) {
  if (!(n_atoms > 0) || !(eta0 > 0) || !(aspect_ratio > 0))
    throw std::invalid_argument("CloudGeometry: positive N_A, eta0 and aspect ratio required");
  CloudGeometry c;
  c.eta0 = eta0;
  const double vol = n_atoms / (eta0 * std::pow(kPi / 2, 1.5));
  c.sigma_perp = std::cbrt(vol / aspect_ratio);
  c.sigma_z = aspect_ratio * c.sigma_perp;
  return c;
}

cplx mode_function(int p, int l, double r, double z, const BeamGeometry& beam) {
  if (p < 0) throw std::invalid_argument("mode_function: p >= 0");
  const int al = std::abs(l);
  const double w = beam.waist(z);
  const double s = 2 * r * r / (w * w);
  double norm = 1;
  for (int i = p + 1; i <= p + al; ++i) norm /= i;
  const double amp = beam.w0 / w * std::sqrt(norm) * std::pow(std::sqrt(s), al) *
                     boost::math::laguerre(p, al, s) * std::exp(-r * r / (w * w));
  const double k0 = 2 * kPi / beam.wavelength;
  const double rc = beam.curvature_radius(z);
  const double curv = std::isinf(rc) ? 0.0 : k0 * r * r / (2 * rc);
  return std::polar(amp, curv - (2 * p + al + 1) * beam.gouy(z));
}

double laguerre_integral(double alpha, const std::vector<int>& ps) {
  auto fn = [&](double s) {
    double v = std::exp(-alpha * s);
    for (int p : ps) v *= boost::math::laguerre(p, s);
    return v;
  };
  return quad::gauss_kronrod<double, 61>::integrate(fn, 0.0, std::numeric_limits<double>::infinity(), 15,
                                                     kQuadTol);
}

cplx effective_atom_number(const CloudGeometry& cloud, const BeamGeometry& beam, int p, int k_power) {
  if (k_power < 1 || k_power > 3) throw std::invalid_argument("effective_atom_number: K in {1,2,3}");
  std::vector<int> ps(k_power, p);
  auto slice = [&](double z, bool imag) {
    const double w = beam.waist(z);
    const double a = (beam.w0 / w) * (beam.w0 / w);
    const double rho = w * w / (cloud.sigma_perp * cloud.sigma_perp);
    const double radial = p == 0 ? 1.0 / (k_power + rho) : laguerre_integral(k_power + rho, ps);
    const cplx ph = std::pow(gouy2(beam, z), k_power * p);
    const cplx v = cloud.eta0 * std::exp(-2 * z * z / (cloud.sigma_z * cloud.sigma_z)) * (kPi * w * w / 2) *
                   std::pow(a, k_power) * ph * radial;
    return imag ? v.imag() : v.real();
  };
  // z = σ_z u keeps the quadrature on the cloud's own length scale
  const double inf = std::numeric_limits<double>::infinity();
  const double sz = cloud.sigma_z;
  const double re = quad::gauss_kronrod<double, 61>::integrate([&](double u) { return slice(sz * u, false); }, -inf,
                                                               inf, 15, kQuadTol);
  const double im = p == 0 ? 0.0
                           : quad::gauss_kronrod<double, 61>::integrate(
                                 [&](double u) { return slice(sz * u, true); }, -inf, inf, 15, kQuadTol);
  return {sz * re, sz * im};
}

double od_eff(const CloudGeometry& cloud, const BeamGeometry& beam) {
  return effective_atom_number(cloud, beam, 0, 2).real() * beam.sigma0_over_a();
}

namespace {

// slice-independent radial parts of c and g
struct RadialTables {
  int P = 0;
  MatrixXd l2;             // L(2; p, q)
  std::vector<double> l3;  // L(3; p, q, r)
};

RadialTables radial_tables(int p_max) {
  RadialTables t;
  t.P = p_max + 1;
  const int P = t.P;
  t.l2.resize(P, P);
  for (int p = 0; p < P; ++p)
    for (int q = p; q < P; ++q) t.l2(p, q) = t.l2(q, p) = laguerre_integral(2, {p, q});
  t.l3.assign(P * P * P, 0.0);
  for (int p = 0; p < P; ++p)
    for (int q = 0; q < P; ++q)
      for (int r = 0; r < P; ++r) {
        if (p > q || q > r) continue;
        const double v = laguerre_integral(3, {p, q, r});
        const int idx[6][3] = {{p, q, r}, {p, r, q}, {q, p, r}, {q, r, p}, {r, p, q}, {r, q, p}};
        for (auto& i : idx) t.l3[(i[0] * P + i[1]) * P + i[2]] = v;
      }
  return t;
}

ProjectionTables tables_at(const RadialTables& rt, const BeamGeometry& beam, double z) {
  ProjectionTables t;
  const int P = rt.P;
  t.p_max = P - 1;
  const double w = beam.waist(z);
  const double a = (beam.w0 / w) * (beam.w0 / w);
  const cplx ph = gouy2(beam, z);
  t.c.resize(P, P);
  for (int p = 0; p < P; ++p)
    for (int q = 0; q < P; ++q) t.c(p, q) = a * rt.l2(p, q) * std::pow(ph, p - q);
  t.g.assign(P * P * P, 0.0);
  for (int p = 0; p < P; ++p)
    for (int q = 0; q < P; ++q)
      for (int r = 0; r < P; ++r) t.g[(p * P + q) * P + r] = a * a * rt.l3[(p * P + q) * P + r] * std::pow(ph, q - p - r);
  return t;
}

}  // namespace

ProjectionTables projection_tables(const BeamGeometry& beam, double z, int p_max) {
  if (p_max < 0) throw std::invalid_argument("projection_tables: p_max >= 0");
  return tables_at(radial_tables(p_max), beam, z);
}

ParaxialModel make_paraxial_model(const CloudGeometry& cloud, const BeamGeometry& beam, const LatticeConfig& cfg) {
  if (cfg.slices < 1 || cfg.p_max < 0) throw std::invalid_argument("make_paraxial_model: slices >= 1, p_max >= 0");
  ParaxialModel m;
  m.config = cfg;
  m.beam = beam;
  m.cloud = cloud;
  const SpinSystem sys = spin_matrices(cfg.f);
  m.basis = build_embedded_basis(prepare_fiducial(cfg.prep, sys), sys);
  m.kappa = sys.g_f * sys.g_f * beam.sigma0_over_a() / 9;

  const QutritOperators q = qutrit_operators(m.basis, true);
  const PumpTables pt = coefficient_tables(m.basis, sys, PumpModel{}, true);
  std::vector<int> xi = {0};
  if (m.basis.has_transfer()) xi.push_back(2);
  const int nth = static_cast<int>(xi.size());
  m.drift = pt.drift(xi, xi);
  for (const auto& nz : pt.noise) m.noise.push_back(nz(xi, xi));
  m.pop = pt.pop;
  m.s0.resize(nth, nth);
  for (int a = 0; a < nth; ++a)
    for (int b = 0; b < nth; ++b) {
      const CMat& oa = q.ops[xi[a]];
      const CMat& ob = q.ops[xi[b]];
      m.s0(a, b) = 0.5 * expect(m.basis.up, oa * ob + ob * oa) - expect(m.basis.up, oa) * expect(m.basis.up, ob);
    }
  m.weights.resize(nth);
  m.weights(0) = m.basis.v_up;
  if (nth > 1) m.weights(1) = m.basis.w_up;
  m.fx_means.resize(q.states.size());
  for (std::size_t s = 0; s < q.states.size(); ++s) m.fx_means(s) = expect(q.states[s], sys.fx);

  const int K = cfg.slices, P = cfg.p_max + 1;
  const RadialTables rt = radial_tables(cfg.p_max);
  const double dz = 6 * cloud.sigma_z / K;
  m.tables.resize(K);
  m.n_init.resize(K);
  m.b2.resize(K);
  for (int k = 0; k < K; ++k) {
    const double z = -3 * cloud.sigma_z + (k + 0.5) * dz;
    m.tables[k] = tables_at(rt, beam, z);
    const double w = beam.waist(z);
    const double a = (beam.w0 / w) * (beam.w0 / w);
    const double rho = w * w / (cloud.sigma_perp * cloud.sigma_perp);
    const cplx ph = gouy2(beam, z);
    const double ez = cloud.eta0 * std::exp(-2 * z * z / (cloud.sigma_z * cloud.sigma_z)) * kPi * w * w / 2;
    m.n_init[k].resize(P);
    m.b2[k].resize(P, P);
    for (int p = 0; p < P; ++p) {
      m.n_init[k](p) = dz * ez * a * std::pow(ph, p) * laguerre_integral(1 + rho, {p});
      for (int r = p; r < P; ++r) {
        const double li = laguerre_integral(2 + rho, {p, r});
        m.b2[k](p, r) = dz * ez * a * a * std::pow(ph, r - p) * li;
        m.b2[k](r, p) = dz * ez * a * a * std::pow(ph, p - r) * li;
      }
    }
    m.n1 += m.n_init[k](0).real();
    m.n2 += m.b2[k](0, 0).real();
  }
  return m;
}

SpinWaveLattice lattice_init(const ParaxialModel& m) {
  SpinWaveLattice s;
  s.k = m.config.slices;
  s.p = m.config.p_max + 1;
  s.n_theta = static_cast<int>(m.weights.size());
  s.n_pops = static_cast<int>(m.pop.rows());
  s.dz = 6 * m.cloud.sigma_z / s.k;
  for (int k = 0; k < s.k; ++k) s.z.push_back(-3 * m.cloud.sigma_z + (k + 0.5) * s.dz);
  const int n = s.k * s.p * s.n_theta;
  s.cov = MatrixXcd::Zero(n, n);
  for (int k = 0; k < s.k; ++k)
    for (int p = 0; p < s.p; ++p)
      for (int q = 0; q < s.p; ++q)
        for (int a = 0; a < s.n_theta; ++a)
          for (int b = 0; b < s.n_theta; ++b) s.cov(s.index(k, p, a), s.index(k, q, b)) = m.b2[k](p, q) * m.s0(a, b);
  s.pops.assign(s.k, MatrixXcd::Zero(s.p, s.n_pops));
  for (int k = 0; k < s.k; ++k) s.pops[k].col(0) = m.n_init[k];
  return s;
}

void spinwave_rhs(const ParaxialModel& m, const SpinWaveLattice& s, SpinWaveLattice& d) {
  const int K = s.k, P = s.p, nth = s.n_theta, mm = P * nth;
  const int n = K * mm;
  const double gam = m.config.pumping ? 1.0 : 0.0;
  d.k = s.k;
  d.p = s.p;
  d.n_theta = s.n_theta;
  d.n_pops = s.n_pops;
  d.dz = s.dz;
  d.cov.resize(n, n);
  // measurement backaction on the fundamental spin wave
  VectorXcd e = VectorXcd::Zero(n);
  for (int k = 0; k < K; ++k)
    for (int a = 0; a < nth; ++a) e(s.index(k, 0, a)) = m.weights(a);
  const VectorXcd u = s.cov.transpose() * e;
  d.cov.noalias() = -m.kappa * u.conjugate() * u.transpose();
  d.pops.resize(K);
  if (gam == 0) {
    for (int k = 0; k < K; ++k) d.pops[k] = MatrixXcd::Zero(P, s.n_pops);
    return;
  }
  for (int k = 0; k < K; ++k) {
    const auto& t = m.tables[k];
    MatrixXcd lb(mm, mm);
    for (int p = 0; p < P; ++p)
      for (int q = 0; q < P; ++q) lb.block(p * nth, q * nth, nth, nth) = t.c(p, q) * m.drift.cast<cplx>();
    d.cov.middleRows(k * mm, mm).noalias() += lb.conjugate() * s.cov.middleRows(k * mm, mm);
    d.cov.middleCols(k * mm, mm).noalias() += s.cov.middleCols(k * mm, mm) * lb.transpose();
    // noise source, local in the slice: Σ_r g[p,q,r] Σ_ψ N_ψ^r Nz[ψ]
    std::vector<MatrixXcd> mix(P, MatrixXcd::Zero(nth, nth));
    for (int r = 0; r < P; ++r)
      for (int ps = 0; ps < s.n_pops; ++ps) mix[r] += s.pops[k](r, ps) * m.noise[ps].cast<cplx>();
    for (int p = 0; p < P; ++p)
      for (int q = 0; q < P; ++q) {
        MatrixXcd src = MatrixXcd::Zero(nth, nth);
        for (int r = 0; r < P; ++r) src += t.g[(p * P + q) * P + r] * mix[r];
        d.cov.block(k * mm + p * nth, k * mm + q * nth, nth, nth) += src;
      }
    d.pops[k] = t.c * s.pops[k] * m.pop.cast<cplx>();
  }
}

double fundamental_variance(const ParaxialModel& m, const SpinWaveLattice& s) {
  VectorXcd e = VectorXcd::Zero(s.cov.rows());
  for (int k = 0; k < s.k; ++k)
    for (int a = 0; a < s.n_theta; ++a) e(s.index(k, 0, a)) = m.weights(a);
  return (e.transpose() * s.cov * e).value().real();
}

double fundamental_mean_fx(const ParaxialModel& m, const SpinWaveLattice& s) {
  double fx = 0;
  for (int k = 0; k < s.k; ++k)
    for (int ps = 0; ps < s.n_pops; ++ps) fx += s.pops[k](0, ps).real() * m.fx_means(ps);
  return fx;
}

double paraxial_zeta(const ParaxialModel& m, const SpinWaveLattice& s) {
  const double fx = fundamental_mean_fx(m, s);
  return 2 * m.config.f * m.n1 * m.n1 / m.n2 * fundamental_variance(m, s) / (fx * fx);
}

namespace {

using StateVec = std::vector<double>;

void pack(const SpinWaveLattice& s, StateVec& y) {
  const std::size_t nc = s.cov.size();
  y.resize(2 * nc + 2 * static_cast<std::size_t>(s.k * s.p * s.n_pops));
  std::copy_n(reinterpret_cast<const double*>(s.cov.data()), 2 * nc, y.begin());
  double* out = y.data() + 2 * nc;
  for (const auto& pk : s.pops) {
    std::copy_n(reinterpret_cast<const double*>(pk.data()), 2 * pk.size(), out);
    out += 2 * pk.size();
  }
}

void unpack(const StateVec& y, SpinWaveLattice& s) {
  const std::size_t nc = s.cov.size();
  std::copy_n(y.begin(), 2 * nc, reinterpret_cast<double*>(s.cov.data()));
  const double* in = y.data() + 2 * nc;
  for (auto& pk : s.pops) {
    std::copy_n(in, 2 * pk.size(), reinterpret_cast<double*>(pk.data()));
    in += 2 * pk.size();
  }
}

}  // namespace

ParaxialRun run_paraxial(const ParaxialModel& m, const ParaxialRunOptions& opt) {
  SpinWaveLattice s = lattice_init(m);
  SpinWaveLattice work = s, deriv = s;
  ParaxialRun run;
  run.od_eff = m.n2 * m.beam.sigma0_over_a();
  auto rhs = [&](const StateVec& y, StateVec& dy, double) {
    unpack(y, work);
    spinwave_rhs(m, work, deriv);
    pack(deriv, dy);
  };
  double best = std::numeric_limits<double>::infinity();
  auto record = [&](double t, const SpinWaveLattice& st) {
    const double z = paraxial_zeta(m, st);
    run.t.push_back(t);
    run.zeta.push_back(z);
    if (z < best) {
      best = z;
      run.t_peak = t;
    }
    const double nrm = st.cov.norm();
    if (nrm > 0) run.max_hermitian_defect = std::max(run.max_hermitian_defect, (st.cov - st.cov.adjoint()).norm() / nrm);
    VectorXcd e = VectorXcd::Zero(st.cov.rows());
    for (int k = 0; k < st.k; ++k)
      for (int a = 0; a < st.n_theta; ++a) e(st.index(k, 0, a)) = m.weights(a);
    const cplx var = (e.transpose() * st.cov * e).value();
    run.max_imag_ratio = std::max(run.max_imag_ratio, std::abs(var.imag()) / std::abs(var));
  };
  StateVec y;
  pack(s, y);
  record(0.0, s);
  auto stepper = odeint::make_dense_output(opt.atol, opt.rtol, odeint::runge_kutta_dopri5<StateVec>());
  stepper.initialize(y, 0.0, opt.dt_out);
  const int n_out = static_cast<int>(std::lround(opt.t_max / opt.dt_out));
  StateVec yk(y.size());
  SpinWaveLattice snap = s;
  int k = 1;
  bool stop = false;
  while (k <= n_out && !stop) {
    const auto [t0, t1] = stepper.do_step(rhs);
    (void)t0;
    if (stepper.current_time_step() < 1e-14) throw NumericalError("run_paraxial: step size underflow");
    while (k <= n_out && k * opt.dt_out <= t1) {
      stepper.calc_state(k * opt.dt_out, yk);
      unpack(yk, snap);
      record(k * opt.dt_out, snap);
      ++k;
      if (opt.stop_after_peak && db(run.zeta.back()) < db(best) - 1.0) {
        stop = true;
        break;
      }
    }
  }
  run.peak_db = db(best);
  return run;
}

std::vector<ScanPoint> geometry_scan(const ScanConfig& cfg) {
  const std::size_t na = cfg.aspect_ratios.size(), nw = cfg.waists.size();
  std::vector<ScanPoint> pts(na * nw);
  tbb::parallel_for(std::size_t(0), na * nw, [&](std::size_t i) {
    const double ar = cfg.aspect_ratios[i / nw];
    const double w0 = cfg.waists[i % nw];
    const CloudGeometry cloud = CloudGeometry::from_atoms(cfg.n_atoms, cfg.eta0, ar);
    BeamGeometry beam;
    beam.w0 = w0;
    beam.wavelength = cfg.wavelength;
    const ParaxialModel m = make_paraxial_model(cloud, beam, cfg.lattice);
    const ParaxialRun r = run_paraxial(m, cfg.run);
    pts[i] = {ar, w0, r.od_eff, r.peak_db, r.t_peak};
  });
  return pts;
}

void write_scan_csv(std::ostream& os, const std::vector<ScanPoint>& pts) {
  os << "AR,w0_um,OD_eff,peak_dB,t_peak_gamma0\n";
  os.precision(10);
  for (const auto& p : pts)
    os << p.aspect_ratio << ',' << p.w0 * 1e6 << ',' << p.od_eff << ',' << p.peak_db << ',' << p.t_peak << '\n';
}

}  // namespace squeeze
