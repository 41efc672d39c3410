#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace squeeze {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

struct ProtocolParams;

// thrown when the fiducial state is an f_z eigenstate
struct NoCoupledState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Manifold { upper, lower };

struct SpinSystem {
  double f = 0.5;
  int dim = 2;
  CMat fx, fy, fz;
  double g_f = 2.0;
};

// basis ordered m_z = f ... -f
SpinSystem spin_matrices(double f, Manifold manifold = Manifold::upper);

bool is_half_integer(double f);  // 2f odd
bool is_integer_spin(double f);

enum class Prep { scs, cat, mx0, yurke, half_yurke };
Prep parse_prep(const std::string& name);
std::string to_string(Prep p);

CVec prepare_fiducial(Prep name, const SpinSystem& sys, std::optional<double> alpha = std::nullopt);

// |f, m> in the z basis
CVec zket(const SpinSystem& sys, double m);
// eigenvector of fx with eigenvalue m (phase: largest component real positive)
CVec xket(const SpinSystem& sys, double m);

struct EmbeddedBasis {
  double f = 0.5;
  CVec up, down;
  std::optional<CVec> wr;
  double v_up = 0, w_up = 0;
  double var_up = 0, var_down = 0;  // (Δf_z²)_↑, (Δf_z²)_↓
  double fz_up = 0, fz_down = 0, fz_wr = 0;
  double fx_up = 0, fx_down = 0, fx_wr = 0;
  double zeta_single = 0;  // 2f(Δf_z²)_↑/<f_x>_↑²
  bool has_transfer() const { return wr.has_value(); }
};

inline constexpr double kTransferThreshold = 1e-9;

EmbeddedBasis build_embedded_basis(const CVec& up, const SpinSystem& sys);

// per-pulse collective coupling ξ = χ² N_L N_A (Δf_z²)_↑
double collective_coupling_xi(const EmbeddedBasis& basis, const ProtocolParams& params);

}  // namespace squeeze
