#pragma once

#include <complex>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "squeeze/spin_algebra.hpp"

namespace squeeze {

// SI units throughout (metres, m⁻³); time in units of 1/γ_0
struct BeamGeometry {
  double w0 = 31e-6;
  double wavelength = 852e-9;

  double z_r() const;
  double area() const;  // A = π w0² / 2
  double waist(double z) const;
  double gouy(double z) const;
  double curvature_radius(double z) const;  // +inf at the waist
  double sigma0() const;                    // 3λ²/2π
  double sigma0_over_a() const { return sigma0() / area(); }
};

struct CloudGeometry {
  double eta0 = 5e17;
  double sigma_perp = 0, sigma_z = 0;  // 1/e² radii

  double aspect_ratio() const { return sigma_z / sigma_perp; }
  double n_atoms() const;
  double density(double r, double z) const;
  // volume N_A/η₀ held fixed while the aspect ratio varies
  static CloudGeometry from_atoms(double n_atoms, double eta0, double aspect_ratio);
};

// Laguerre-Gauss mode, ∫|u|² d²r = A, u_00(0, 0) = 1, azimuth φ = 0
std::complex<double> mode_function(int p, int l, double r, double z, const BeamGeometry& beam);

// ∫ η β_p0^K d³r with β_p0 = u_00 u_p0*
std::complex<double> effective_atom_number(const CloudGeometry& cloud, const BeamGeometry& beam, int p, int k_power);
double od_eff(const CloudGeometry& cloud, const BeamGeometry& beam);

// ∫_0^∞ e^{−α s} Π L_{p_i}(s) ds
double laguerre_integral(double alpha, const std::vector<int>& ps);

struct ProjectionTables {
  int p_max = 0;
  // c[p][q] = (1/A) ∫ |u_00|² u_p* u_q d²r at slice z
  Eigen::MatrixXcd c;
  // g[(p·P + q)·P + r], from β_00 β_p* β_q = Σ_r g β_r
  std::vector<std::complex<double>> g;
};
ProjectionTables projection_tables(const BeamGeometry& beam, double z, int p_max);

struct LatticeConfig {
  int slices = 61;
  int p_max = 6;
  double f = 0.5;
  Prep prep = Prep::scs;
  bool pumping = true;
};

struct SpinWaveLattice {
  int k = 0, p = 0, n_theta = 0, n_pops = 0;
  double dz = 0;
  std::vector<double> z;
  Eigen::MatrixXcd cov;  // Cov(X_a†, X_b) over (slice, p, θ), θ ∈ {X_du[, X_wd]}
  std::vector<Eigen::MatrixXcd> pops;  // [slice] P × n_pops effective populations N_ψ^p
  int index(int slice, int mode, int theta) const { return (slice * p + mode) * n_theta + theta; }
};

struct ParaxialModel {
  LatticeConfig config;
  BeamGeometry beam;
  CloudGeometry cloud;
  EmbeddedBasis basis;
  double kappa = 0;  // g²(σ₀/A)/9
  Eigen::MatrixXd drift;  // X-block of Tr(D(x_a)x_b)
  std::vector<Eigen::MatrixXd> noise;  // [ψ] X-block of Tr(𝒩 n_ψ)
  Eigen::MatrixXd pop;                 // Tr(D(n_ψ)n_φ)
  Eigen::MatrixXd s0;                  // single-atom X covariances in ↑
  Eigen::VectorXd weights;             // (v, w) on the fundamental mode
  Eigen::VectorXd fx_means;            // ⟨f_x⟩_ψ
  std::vector<ProjectionTables> tables;  // per slice
  std::vector<Eigen::VectorXcd> n_init;  // [slice] N_↑^p at t = 0
  std::vector<Eigen::MatrixXcd> b2;      // [slice] covariance weights
  double n1 = 0, n2 = 0;                 // Σ_k N^{00(1)}, Σ_k N^{00(2)}
};

ParaxialModel make_paraxial_model(const CloudGeometry& cloud, const BeamGeometry& beam, const LatticeConfig& cfg);
SpinWaveLattice lattice_init(const ParaxialModel& m);

// time derivative of (cov, pops)
void spinwave_rhs(const ParaxialModel& m, const SpinWaveLattice& s, SpinWaveLattice& d);

double fundamental_variance(const ParaxialModel& m, const SpinWaveLattice& s);
double fundamental_mean_fx(const ParaxialModel& m, const SpinWaveLattice& s);
double paraxial_zeta(const ParaxialModel& m, const SpinWaveLattice& s);

struct ParaxialRun {
  std::vector<double> t, zeta;
  double peak_db = 0, t_peak = 0, od_eff = 0;
  double max_hermitian_defect = 0;  // ‖T − T†‖ / ‖T‖
  double max_imag_ratio = 0;        // |Im Var| / |Var|
};

struct ParaxialRunOptions {
  double t_max = 3.0;
  double dt_out = 5e-3;
  double rtol = 1e-7;
  double atol = 1e-3;
  bool stop_after_peak = true;
};

ParaxialRun run_paraxial(const ParaxialModel& m, const ParaxialRunOptions& opt = {});

struct ScanPoint {
  double aspect_ratio = 0, w0 = 0, od_eff = 0, peak_db = 0, t_peak = 0;
};
struct ScanConfig {
  std::vector<double> aspect_ratios;
  std::vector<double> waists;  // metres
  double n_atoms = 9.8e6;
  double eta0 = 5e17;
  double wavelength = 852e-9;
  LatticeConfig lattice{21, 2};
  ParaxialRunOptions run;
};
std::vector<ScanPoint> geometry_scan(const ScanConfig& cfg);
void write_scan_csv(std::ostream& os, const std::vector<ScanPoint>& pts);

}  // namespace squeeze
