#include "squeeze/spin_algebra.hpp"

#include <cmath>
#include <numbers>

#include "squeeze/params.hpp"

namespace squeeze {

namespace {

int twice(double f) { return static_cast<int>(std::lround(2.0 * f)); }

double expect(const CVec& psi, const CMat& op) { return psi.dot(op * psi).real(); }

}  // namespace

bool is_half_integer(double f) { return std::abs(2.0 * f - twice(f)) < 1e-12 && twice(f) % 2 == 1; }

bool is_integer_spin(double f) { return std::abs(2.0 * f - twice(f)) < 1e-12 && twice(f) % 2 == 0; }

SpinSystem spin_matrices(double f, Manifold manifold) {
  if (!(f > 0) || std::abs(2.0 * f - twice(f)) > 1e-12)
    throw std::invalid_argument("spin_matrices: 2f must be a positive integer");
  SpinSystem s;
  s.f = f;
  s.dim = twice(f) + 1;
  const int d = s.dim;
  CMat fp = CMat::Zero(d, d);
  s.fz = CMat::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double m = f - k;
    s.fz(k, k) = m;
    if (k > 0) fp(k - 1, k) = std::sqrt(f * (f + 1) - m * (m + 1));
  }
  const CMat fm = fp.adjoint();
  s.fx = (fp + fm) / 2.0;
  s.fy = (fp - fm) / cd(0, 2);
  s.g_f = manifold == Manifold::upper ? 1.0 / f : 1.0 / (f + 1);
  return s;
}

Prep parse_prep(const std::string& name) {
  if (name == "scs") return Prep::scs;
  if (name == "cat") return Prep::cat;
  if (name == "mx0") return Prep::mx0;
  if (name == "yurke") return Prep::yurke;
  if (name == "half_yurke") return Prep::half_yurke;
  throw std::invalid_argument("unknown preparation: " + name);
}

std::string to_string(Prep p) {
  switch (p) {
    case Prep::scs: return "scs";
    case Prep::cat: return "cat";
    case Prep::mx0: return "mx0";
    case Prep::yurke: return "yurke";
    case Prep::half_yurke: return "half_yurke";
  }
  return "?";
}

CVec zket(const SpinSystem& sys, double m) {
  const double k = sys.f - m;
  const int idx = static_cast<int>(std::lround(k));
  if (std::abs(k - idx) > 1e-12 || idx < 0 || idx >= sys.dim)
    throw std::invalid_argument("zket: m outside the spin-f ladder");
  CVec v = CVec::Zero(sys.dim);
  v(idx) = 1.0;
  return v;
}

CVec xket(const SpinSystem& sys, double m) {
  // exp(-i π/2 f_y) rotates f_z eigenstates onto f_x eigenstates
  Eigen::SelfAdjointEigenSolver<CMat> es(sys.fy);
  const Eigen::VectorXd lam = es.eigenvalues();
  CVec phase(sys.dim);
  for (int k = 0; k < sys.dim; ++k) phase(k) = std::exp(cd(0, -std::numbers::pi / 2 * lam(k)));
  const CMat rot = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
  return rot * zket(sys, m);
}

CVec prepare_fiducial(Prep name, const SpinSystem& sys, std::optional<double> alpha) {
  const double f = sys.f;
  switch (name) {
    case Prep::scs: return xket(sys, f);
    case Prep::cat: {
      CVec v = (zket(sys, f) + zket(sys, -f)) / std::sqrt(2.0);
      return v;
    }
    case Prep::mx0:
      if (!is_integer_spin(f)) throw std::invalid_argument("mx0 requires integer f");
      return xket(sys, 0.0);
    case Prep::yurke: {
      if (!is_integer_spin(f) || f < 1) throw std::invalid_argument("yurke requires integer f >= 1");
      if (!alpha) throw std::invalid_argument("yurke requires alpha");
      const double s = std::sin(*alpha), c = std::cos(*alpha);
      return s / std::sqrt(2.0) * zket(sys, 1) + c * zket(sys, 0) + s / std::sqrt(2.0) * zket(sys, -1);
    }
    case Prep::half_yurke: {
      if (!is_half_integer(f) || f < 1.5) throw std::invalid_argument("half_yurke requires half-integer f >= 3/2");
      if (!alpha) throw std::invalid_argument("half_yurke requires alpha");
      const double s = std::sin(*alpha), c = std::cos(*alpha);
      return s / std::sqrt(2.0) * zket(sys, 1.5) + c * zket(sys, 0.5) + s / std::sqrt(2.0) * zket(sys, -0.5);
    }
  }
  throw std::invalid_argument("prepare_fiducial: unknown preparation");
}

EmbeddedBasis build_embedded_basis(const CVec& up_in, const SpinSystem& sys) {
  if (up_in.size() != sys.dim) throw std::invalid_argument("build_embedded_basis: dimension mismatch");
  const double nrm = up_in.norm();
  if (std::abs(nrm - 1.0) > 1e-9) throw std::invalid_argument("build_embedded_basis: state not normalized");
  EmbeddedBasis b;
  b.f = sys.f;
  b.up = up_in / nrm;
  const CMat id = CMat::Identity(sys.dim, sys.dim);

  b.fz_up = expect(b.up, sys.fz);
  const CMat dfz_u = sys.fz - b.fz_up * id;
  b.var_up = expect(b.up, dfz_u * dfz_u);
  if (b.var_up < 1e-12)
    throw NoCoupledState("no coupled state exists when the fiducial state is an eigenstate of f_z");
  b.down = dfz_u * b.up / std::sqrt(b.var_up);
  b.v_up = std::sqrt(2.0 * b.var_up);

  b.fz_down = expect(b.down, sys.fz);
  const CMat dfz_d = sys.fz - b.fz_down * id;
  b.var_down = expect(b.down, dfz_d * dfz_d);
  const CVec raw = std::sqrt(2.0) * dfz_d * b.down - b.v_up * b.up;
  const double w = raw.norm();
  if (w > kTransferThreshold) {
    b.wr = raw / w;
    b.w_up = w;
    b.fz_wr = expect(*b.wr, sys.fz);
    b.fx_wr = expect(*b.wr, sys.fx);
  }
  b.fx_up = expect(b.up, sys.fx);
  b.fx_down = expect(b.down, sys.fx);
  b.zeta_single = b.fx_up * b.fx_up > 0 ? 2.0 * sys.f * b.var_up / (b.fx_up * b.fx_up)
                                        : std::numeric_limits<double>::infinity();
  return b;
}

double collective_coupling_xi(const EmbeddedBasis& basis, const ProtocolParams& params) {
  const double chi = params.chi();
  return chi * chi * params.n_light * params.n_atoms * basis.var_up;
}

}  // namespace squeeze
