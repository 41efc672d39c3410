#include "squeeze/optical_pumping.hpp"

#include <cmath>

#include "squeeze/params.hpp"

namespace squeeze {

using Eigen::MatrixXd;

namespace {

CMat outer(const CVec& a, const CVec& b) { return a * b.adjoint(); }

CMat anti(const CMat& a, const CMat& b) { return a * b + b * a; }

double hs(const CMat& a, const CMat& b) { return (a * b).trace().real(); }

std::optional<CVec> normalized(const CVec& v) {
  const double n = v.norm();
  if (n < 1e-12) return std::nullopt;
  return CVec(v / n);
}

}  // namespace

CMat dissipate(const SpinSystem& sys, const CMat& o) {
  const double g2 = sys.g_f * sys.g_f;
  return -2.0 / 9.0 * o + g2 / 9.0 * (sys.fz * o * sys.fz + 0.5 * sys.fy * o * sys.fy + 0.5 * sys.fx * o * sys.fx);
}

CMat noise_superop(const SpinSystem& sys, const CMat& o, const CMat& a) {
  return 0.5 * dissipate(sys, anti(o, a)) - 0.5 * anti(dissipate(sys, o), a) - 0.5 * anti(o, dissipate(sys, a));
}

std::vector<CMat> jump_operators(JumpAxis axis, const SpinSystem& sys) {
  const double g = sys.g_f;
  const CMat id = CMat::Identity(sys.dim, sys.dim);
  const double r = std::sqrt(0.5);
  switch (axis) {
    case JumpAxis::parallel: {
      // x-quantized ladder f_± = f_y ± i f_z
      const CMat fp = sys.fy + cd(0, 1) * sys.fz;
      const CMat fm = sys.fy - cd(0, 1) * sys.fz;
      return {g / 3 * r * fm, 2.0 / 3.0 * id, g / 3 * r * fp};
    }
    case JumpAxis::perpendicular:
      return {r * (2.0 / 3.0 * id - g / 3 * sys.fz), g / 3 * sys.fy, r * (2.0 / 3.0 * id + g / 3 * sys.fz)};
    case JumpAxis::rotating:
      return {2.0 / 3.0 * id, g / 3 * sys.fz, g / 3 * r * sys.fx, g / 3 * r * sys.fy};
  }
  return {};
}

CMat jump_master(const std::vector<CMat>& jumps, const CMat& rho) {
  CMat out = -kGammaOp * rho;
  for (const auto& w : jumps) out += w * rho * w.adjoint();
  return out;
}

CMat channel_superoperator(const std::vector<CMat>& jumps, int dim) {
  CMat s = CMat::Zero(dim * dim, dim * dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) {
      CMat e = CMat::Zero(dim, dim);
      e(i, j) = 1;
      const CMat out = jump_master(jumps, e);
      s.col(j * dim + i) = Eigen::Map<const CVec>(out.data(), dim * dim);
    }
  return s;
}

PumpRates rates(const EmbeddedBasis& b, const SpinSystem& sys, const PumpModel& model) {
  PumpRates r;
  const double gs = model.gamma_s;
  r.gamma_op = kGammaOp * gs;
  const CMat dup = dissipate(sys, outer(b.up, b.up));
  r.flip = gs * b.down.dot(dup * b.down).real();
  r.loss_up = -gs * dup.trace().real();
  r.loss_down = -gs * dissipate(sys, outer(b.down, b.down)).trace().real();
  double diag = 0;
  for (const auto& w : jump_operators(model.axis, sys)) diag += std::norm(b.up.dot(w * b.up));
  r.loss_up_literal = gs * (kGammaOp - diag);
  return r;
}

CoherenceDiagnostics coherence_diagnostics(const EmbeddedBasis& b, const SpinSystem& sys, const PumpModel& model) {
  CoherenceDiagnostics d;
  const auto jumps = jump_operators(model.axis, sys);
  const CMat dfz = sys.fz - b.fz_up * CMat::Identity(sys.dim, sys.dim);
  double c = 0;
  for (const auto& w : jumps) c += (w * b.up).dot(dfz * (w * b.down)).real();
  d.c_up = 2.0 * std::sqrt(b.var_up) * c;
  if (!b.wr) return d;
  const CVec& wr = *b.wr;
  double t = 0, n = 0, ms = 0;
  for (const auto& w : jumps) {
    const auto qu = normalized(w * b.up);
    const auto qd = normalized(w * b.down);
    if (qu && qd) t += (qu->dot(b.down) * wr.dot(*qd)).real();
    if (qu) n += std::norm(qu->dot(wr));
    ms += (b.up.dot(w * b.up) * b.down.dot(w.adjoint() * wr)).real();
  }
  d.t_up = t;
  d.n_up = n;
  d.mode_sum = ms;
  d.mode_condition = std::abs(ms) < 1e-12;
  d.keep_transfer = t > 0 && n < 1e-12;
  return d;
}

QutritOperators qutrit_operators(const EmbeddedBasis& b, bool with_transfer) {
  QutritOperators q;
  const double r = std::sqrt(0.5);
  const cd i(0, 1);
  auto add_pair = [&](const std::string& name, const CVec& a, const CVec& c) {
    q.labels.push_back("X_" + name);
    q.ops.push_back(r * (outer(a, c) + outer(c, a)));
    q.labels.push_back("Y_" + name);
    q.ops.push_back(i * r * (outer(a, c) - outer(c, a)));
  };
  q.states = {b.up, b.down};
  add_pair("du", b.down, b.up);
  if (with_transfer && b.wr) {
    add_pair("wd", *b.wr, b.down);
    add_pair("uw", b.up, *b.wr);
    q.states.push_back(*b.wr);
  }
  for (const auto& s : q.states) q.pops.push_back(outer(s, s));
  return q;
}

PumpTables coefficient_tables(const EmbeddedBasis& b, const SpinSystem& sys, const PumpModel& model,
                              bool with_transfer) {
  const QutritOperators q = qutrit_operators(b, with_transfer);
  CMat proj = CMat::Identity(sys.dim, sys.dim);
  if (model.project) {
    proj = CMat::Zero(sys.dim, sys.dim);
    for (const auto& p : q.pops) proj += p;
  }
  auto d = [&](const CMat& o) { return CMat(proj * dissipate(sys, o) * proj); };
  auto nz = [&](const CMat& o, const CMat& a) { return CMat(proj * noise_superop(sys, o, a) * proj); };

  PumpTables t;
  t.labels = q.labels;
  const int n = static_cast<int>(q.ops.size());
  const int p = static_cast<int>(q.pops.size());
  t.drift.resize(n, n);
  std::vector<CMat> dops;
  for (int a = 0; a < n; ++a) dops.push_back(d(q.ops[a]));
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) t.drift(a, c) = hs(dops[a], q.ops[c]);
  t.noise.assign(p, MatrixXd::Zero(n, n));
  for (int a = 0; a < n; ++a)
    for (int c = a; c < n; ++c) {
      const CMat m = nz(q.ops[a], q.ops[c]);
      for (int s = 0; s < p; ++s) t.noise[s](a, c) = t.noise[s](c, a) = hs(m, q.pops[s]);
    }
  t.pop.resize(p, p);
  for (int a = 0; a < p; ++a) {
    const CMat dn = d(q.pops[a]);
    for (int c = 0; c < p; ++c) t.pop(a, c) = hs(dn, q.pops[c]);
  }
  return t;
}

MatrixXd PumpUpdates::noise(const Eigen::Vector3d& pops) const { return pops(0) * n_a[0] + pops(1) * n_a[1]; }

PumpUpdates build_updates(const EmbeddedBasis& b, const SpinSystem& sys, const PumpModel& model, double h,
                          bool keep_transfer) {
  if (!(h > 0) || model.gamma_s * h > kMaxPumpStep)
    throw ValidationError("build_updates: require 0 < gamma_s*dt <= 1e-2");
  const auto diag = coherence_diagnostics(b, sys, model);
  if (b.wr && !diag.mode_condition)
    throw UnsupportedPreparation("fiducial state violates the mode condition; use the differential formulation");
  PumpUpdates u;
  u.h = h;
  u.keep_transfer = keep_transfer && b.has_transfer();
  const PumpTables t = coefficient_tables(b, sys, model, true);
  const int na = u.keep_transfer ? 4 : 2;
  const double hg = h * model.gamma_s;
  u.m_a = MatrixXd::Identity(na, na) + hg * t.drift.topLeftCorner(na, na);
  for (int s = 0; s < 3; ++s)
    u.n_a[s] = s < static_cast<int>(t.noise.size()) ? MatrixXd(hg * t.noise[s].topLeftCorner(na, na))
                                                    : MatrixXd::Zero(na, na);
  u.j = Eigen::Matrix3d::Identity();
  const int p = static_cast<int>(t.pop.rows());
  u.j.topLeftCorner(p, p) += hg * t.pop.transpose();
  return u;
}

}  // namespace squeeze
