#include "squeeze/gaussian_core.hpp"

#include <cmath>

namespace squeeze {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::vector<std::string> default_labels(int atomic_modes, bool light) {
  std::vector<std::string> l = {"X_du", "Y_du"};
  if (atomic_modes == 2) {
    l.push_back("X_wd");
    l.push_back("Y_wd");
  }
  if (light) {
    l.push_back("X_y");
    l.push_back("Y_y");
  }
  return l;
}

void require_light(const GaussianState& s, const char* op) {
  if (!s.has_light) throw std::invalid_argument(std::string(op) + ": state has no light mode");
}

}  // namespace

VectorXd GaussianState::commutator_weights() const {
  const int pairs = dim() / 2;
  VectorXd w(pairs);
  if (norm == Normalization::unit) return VectorXd::Ones(pairs);
  w(0) = pops(0) - pops(1);
  if (atomic_modes == 2) w(1) = pops(1) - pops(2);
  if (has_light) w(atomic_modes) = n_light;
  return w;
}

GaussianState vacuum_state(double n_atoms, double n_light, int atomic_modes) {
  if (!(n_atoms > 0) || !(n_light > 0)) throw std::invalid_argument("vacuum_state: N_A, N_L must be positive");
  if (atomic_modes != 1 && atomic_modes != 2) throw std::invalid_argument("vacuum_state: atomic_modes is 1 or 2");
  GaussianState s;
  s.norm = Normalization::population;
  s.atomic_modes = atomic_modes;
  s.has_light = true;
  s.labels = default_labels(atomic_modes, true);
  s.sigma = MatrixXd::Zero(s.labels.size(), s.labels.size());
  s.sigma(0, 0) = s.sigma(1, 1) = n_atoms / 2;
  const int li = s.light_index();
  s.sigma(li, li) = s.sigma(li + 1, li + 1) = n_light / 2;
  s.pops = Eigen::Vector3d(n_atoms, 0, 0);
  s.n_light = n_light;
  return s;
}

GaussianState unit_vacuum(bool with_light) {
  GaussianState s;
  s.norm = Normalization::unit;
  s.atomic_modes = 1;
  s.has_light = with_light;
  s.labels = default_labels(1, with_light);
  s.sigma = MatrixXd::Identity(s.labels.size(), s.labels.size()) / 2;
  s.n_light = 1;
  return s;
}

GaussianState apply_map(const GaussianState& s, const MatrixXd& m, const MatrixXd& n) {
  if (m.rows() != s.dim() || m.cols() != s.dim() || n.rows() != s.dim() || n.cols() != s.dim())
    throw std::invalid_argument("apply_map: dimension mismatch");
  const MatrixXd ns = (n + n.transpose()) / 2;
  if (ns.size() > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(ns, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) throw InvalidChannel("apply_map: noise matrix is not positive semidefinite");
  }
  GaussianState out = s;
  out.sigma = m * s.sigma * m.transpose() + ns;
  return out;
}

GaussianState apply_symplectic(const GaussianState& s, const MatrixXd& m) {
  GaussianState out = s;
  out.sigma = m * s.sigma * m.transpose();
  return out;
}

MatrixXd faraday_unit(double xi) {
  MatrixXd m = MatrixXd::Identity(4, 4);
  m(2, 0) = std::sqrt(xi);
  m(1, 3) = -std::sqrt(xi);
  return m;
}

MatrixXd faraday_population(double xi_up, double xi_down, const Eigen::Vector3d& pops, double n_light,
                            int atomic_modes) {
  const int na = 2 * atomic_modes;
  MatrixXd m = MatrixXd::Identity(na + 2, na + 2);
  m(1, na + 1) = -std::sqrt(xi_up) * (pops(0) - pops(1));
  m(na, 0) = std::sqrt(xi_up) * n_light;
  if (atomic_modes == 2) {
    m(3, na + 1) = -std::sqrt(xi_down) * (pops(1) - pops(2));
    m(na, 2) = std::sqrt(xi_down) * n_light;
  }
  return m;
}

GaussianState homodyne_update(const GaussianState& s, const Eigen::Vector2d& dir) {
  require_light(s, "homodyne_update");
  const int li = s.light_index();
  VectorXd q = VectorXd::Zero(s.dim());
  q(li) = dir(0);
  q(li + 1) = dir(1);
  const VectorXd sq = s.sigma * q;
  const double b = q.dot(sq);
  const double scale = s.sigma.cwiseAbs().maxCoeff();
  MatrixXd cond = s.sigma;
  // Moore-Penrose inverse of the 1×1 measured block; zero below the cutoff
  if (b > 1e-12 * scale && b > 0) cond -= sq * sq.transpose() / b;
  GaussianState out = s;
  out.sigma = cond.topLeftCorner(li, li);
  out.has_light = false;
  out.labels.resize(li);
  return out;
}

GaussianState homodyne_update(const GaussianState& s, const std::string& label) {
  if (label == "X_y") return homodyne_update(s, Eigen::Vector2d(1, 0));
  if (label == "Y_y") return homodyne_update(s, Eigen::Vector2d(0, 1));
  if (label == "X'_y") return homodyne_update(s, Eigen::Vector2d(1, -1) / std::sqrt(2.0));
  throw std::invalid_argument("homodyne_update: measured quadrature must be on the light mode: " + label);
}

MatrixXd rotation_map(int dim, double theta, const std::vector<int>& modes) {
  MatrixXd r = MatrixXd::Identity(dim, dim);
  const double c = std::cos(theta), sn = std::sin(theta);
  for (int p : modes) {
    const int i = 2 * p;
    if (i + 1 >= dim) throw std::invalid_argument("rotation_map: mode out of range");
    r(i, i) = c;
    r(i, i + 1) = -sn;
    r(i + 1, i) = sn;
    r(i + 1, i + 1) = c;
  }
  return r;
}

MatrixXd rotation_map(const GaussianState& s, double theta) {
  std::vector<int> modes;
  for (int p = 0; p < s.atomic_modes; ++p) modes.push_back(p);
  return rotation_map(s.dim(), theta, modes);
}

MatrixXd waveplate_map(const GaussianState& s) {
  require_light(s, "waveplate_map");
  MatrixXd r = MatrixXd::Identity(s.dim(), s.dim());
  const int li = s.light_index();
  r(li, li) = 0;
  r(li, li + 1) = -1;
  r(li + 1, li) = 1;
  r(li + 1, li + 1) = 0;
  return r;
}

GaussianState partial_trace(const GaussianState& s, int mode) {
  const int pairs = s.dim() / 2;
  if (mode < 0 || mode >= pairs) throw std::invalid_argument("partial_trace: mode does not exist");
  std::vector<int> keep;
  for (int i = 0; i < s.dim(); ++i)
    if (i / 2 != mode) keep.push_back(i);
  GaussianState out = s;
  out.sigma = s.sigma(keep, keep);
  out.labels.clear();
  for (int i : keep) out.labels.push_back(s.labels[i]);
  if (s.has_light && mode == s.atomic_modes) {
    out.has_light = false;
  } else {
    if (s.atomic_modes == 1) throw std::invalid_argument("partial_trace: cannot remove the only atomic mode");
    if (mode == 0) throw std::invalid_argument("partial_trace: the X_du/Y_du mode is always retained");
    out.atomic_modes = 1;
  }
  return out;
}

GaussianState append_fresh_light(const GaussianState& s, double n_light) {
  GaussianState base = s.has_light ? partial_trace(s, s.atomic_modes) : s;
  const int na = base.dim();
  GaussianState out = base;
  out.sigma = MatrixXd::Zero(na + 2, na + 2);
  out.sigma.topLeftCorner(na, na) = base.sigma;
  const double v = s.norm == Normalization::unit ? 0.5 : n_light / 2;
  out.sigma(na, na) = out.sigma(na + 1, na + 1) = v;
  out.has_light = true;
  out.n_light = s.norm == Normalization::unit ? 1 : n_light;
  out.labels.push_back("X_y");
  out.labels.push_back("Y_y");
  return out;
}

MatrixXd weighted_symplectic_form(const VectorXd& weights) {
  const int n = 2 * static_cast<int>(weights.size());
  MatrixXd o = MatrixXd::Zero(n, n);
  for (int p = 0; p < weights.size(); ++p) {
    o(2 * p, 2 * p + 1) = weights(p);
    o(2 * p + 1, 2 * p) = -weights(p);
  }
  return o;
}

double symplectic_defect(const MatrixXd& s, const VectorXd& weights) {
  const MatrixXd o = weighted_symplectic_form(weights);
  const double nrm = o.norm();
  return (s * o * s.transpose() - o).norm() / (nrm > 0 ? nrm : 1.0);
}

double physicality_min_eigenvalue(const GaussianState& s) {
  const MatrixXd o = weighted_symplectic_form(s.commutator_weights());
  const Eigen::MatrixXcd h = s.sigma.cast<std::complex<double>>() + std::complex<double>(0, 0.5) * o;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_physical(const GaussianState& s, double rel_tol) {
  return physicality_min_eigenvalue(s) >= -rel_tol * s.sigma.norm();
}

}  // namespace squeeze
