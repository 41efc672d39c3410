#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace squeeze {

struct InvalidChannel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// unit: vacuum variances 1/2 per quadrature. population: commutators weighted by
// population differences, [X_du, Y_du] = i(N_↑ − N_↓) etc.
enum class Normalization { unit, population };

struct GaussianState {
  Normalization norm = Normalization::population;
  std::vector<std::string> labels;
  Eigen::MatrixXd sigma;
  Eigen::Vector3d pops = Eigen::Vector3d::Zero();  // N_↑, N_↓, N_≀
  double n_light = 0;                              // photons per light mode block
  int atomic_modes = 2;                            // 1: (X_du, Y_du); 2: adds (X_wd, Y_wd)
  bool has_light = true;

  int dim() const { return static_cast<int>(sigma.rows()); }
  int light_index() const { return 2 * atomic_modes; }
  // commutator weight of each quadrature pair, length dim()/2
  Eigen::VectorXd commutator_weights() const;
};

// population-normalized vacuum: diag(N_A/2, N_A/2, 0, 0, N_L/2, N_L/2)
GaussianState vacuum_state(double n_atoms, double n_light, int atomic_modes = 2);
// unit-normalized: one atomic mode plus light, all variances 1/2
GaussianState unit_vacuum(bool with_light = true);

GaussianState apply_map(const GaussianState& s, const Eigen::MatrixXd& m, const Eigen::MatrixXd& n);
GaussianState apply_symplectic(const GaussianState& s, const Eigen::MatrixXd& m);

// 4×4 (X_a, P_a, X_y, P_y): X_y += √ξ X_a, P_a −= √ξ P_y
Eigen::MatrixXd faraday_unit(double xi);
// population-weighted three-mode map; xi_* are per photon per atom (χ²(Δf_z²))
Eigen::MatrixXd faraday_population(double xi_up, double xi_down, const Eigen::Vector3d& pops,
                                   double n_light, int atomic_modes);

// condition on the light quadrature q = dir(0) X_y + dir(1) Y_y, then drop the light mode
GaussianState homodyne_update(const GaussianState& s, const Eigen::Vector2d& dir);
GaussianState homodyne_update(const GaussianState& s, const std::string& label);

// rotation by theta of every atomic (X, Y) pair
Eigen::MatrixXd rotation_map(const GaussianState& s, double theta);
// rotation by theta of the selected pair indices only
Eigen::MatrixXd rotation_map(int dim, double theta, const std::vector<int>& modes);
// π/2 rotation of the light block: (X_y, Y_y) -> (−Y_y, X_y)
Eigen::MatrixXd waveplate_map(const GaussianState& s);

// mode is a pair index; the light mode is atomic_modes
GaussianState partial_trace(const GaussianState& s, int mode);
GaussianState append_fresh_light(const GaussianState& s, double n_light);

// skew form nσ, block diagonal with weight·[[0,1],[−1,0]] per pair
Eigen::MatrixXd weighted_symplectic_form(const Eigen::VectorXd& weights);
// ‖S nσ Sᵀ − nσ‖ / ‖nσ‖
double symplectic_defect(const Eigen::MatrixXd& s, const Eigen::VectorXd& weights);

// smallest eigenvalue of sigma + (i/2) nσ
double physicality_min_eigenvalue(const GaussianState& s);
bool is_physical(const GaussianState& s, double rel_tol = 1e-8);

}  // namespace squeeze
