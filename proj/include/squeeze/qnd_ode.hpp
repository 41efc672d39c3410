#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "squeeze/params.hpp"
#include "squeeze/protocols.hpp"
#include "squeeze/spin_algebra.hpp"

namespace squeeze {

// covariances over (X_du, Y_du, X_wd, Y_wd, X_uw, Y_uw), or the first two when the
// fiducial state has no transfer state
struct OdeState {
  Eigen::MatrixXd cov;
  Eigen::VectorXd pops;
  double t = 0;
};

struct OdeCoefficients {
  EmbeddedBasis basis;
  int n_ops = 0, n_pops = 0;
  Eigen::MatrixXd drift;               // Tr(D(x_a) x_b)
  std::vector<Eigen::MatrixXd> noise;  // [ψ] Tr(𝒩(x_a, x_b) n_ψ)
  Eigen::MatrixXd pop;                 // Tr(D(n_ψ) n_φ)
  Eigen::MatrixXd mean_h;              // ⟨q|h_a|q⟩ with h_a = −i[F', x_a], F' = v x_du + w x_wd
  std::vector<Eigen::MatrixXd> conn;   // [q] ⟨q|{h_a,h_b}|q⟩ − 2⟨q|h_a|q⟩⟨q|h_b|q⟩
  Eigen::MatrixXd double_comm;         // Tr([F',[x_a,F']] x_b), terms left out of the closure
  double v = 0, w = 0;
  double kappa = 0;
  double gamma_s = 1;
};

OdeCoefficients ode_coefficients(const CVec& up, const ProtocolParams& params);
OdeState ode_initial_state(const OdeCoefficients& c, double n_atoms);

Eigen::MatrixXd covariance_rhs(const OdeState& s, const OdeCoefficients& c);
Eigen::VectorXd population_rhs(const OdeState& s, const OdeCoefficients& c);

struct OdeOptions {
  double t_max = 3.0;
  double dt_out = 1e-3;
  double rtol = 1e-8;
  double atol = 1e-6;
  Target target = Target::scs;
  bool stop_after_peak = false;  // end once the best ζ_m is 1 dB behind its peak
};

struct OdeResult {
  Trajectory traj;  // zeta_m is the smaller of keep/drop at each time
  std::vector<double> zeta_keep;
  double peak_db = 0, t_peak = 0;
  double peak_keep_db = -1e300, peak_drop_db = -1e300;
  double dropped_terms_ratio = 0;  // max ‖left-out Lindblad terms‖ / ‖dC/dt‖
  std::size_t steps = 0;
};

OdeResult integrate(const CVec& up, const ProtocolParams& params, const OdeOptions& opt = {});
OdeResult integrate(Prep prep, const ProtocolParams& params, const OdeOptions& opt = {});

// closed f = 1 system for (ΔF_z², N_1, N_0, N_−1) with ⟨F_x⟩ = N_A e^{−t/6}
Trajectory exact_f1_reference(const ProtocolParams& params, double t_max = 3.0, double dt_out = 1e-3);

struct SeedReport {
  std::uint64_t seed = 0;
  int iterations = 0;
  double peak_db = 0, t_peak = 0;
  CVec state;
};

struct OptimizeResult {
  SeedReport best;
  std::vector<SeedReport> seeds;
};

struct OptimizeOptions {
  int n_seeds = 128;
  std::uint64_t seed = 1;
  int max_iterations = 1500;
  double t_max = 3.0;
  double dt_out = 5e-3;
  Target target = Target::scs;
};

// Haar-random unit vector in C^dim, deterministic in seed
CVec haar_state(int dim, std::uint64_t seed);
// ODE peak dB of a normalized fiducial vector (objective of the optimizer)
double fiducial_peak_db(const CVec& up, const ProtocolParams& params, double t_max, double dt_out,
                        double* t_peak = nullptr);
OptimizeResult optimize_fiducial(const ProtocolParams& params, const OptimizeOptions& opt = {});
// JSON report of an optimization
std::string optimize_report_json(const OptimizeResult& r, const ProtocolParams& params);

}  // namespace squeeze
