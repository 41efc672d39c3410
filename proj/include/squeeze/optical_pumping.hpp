#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "squeeze/spin_algebra.hpp"

namespace squeeze {

struct UnsupportedPreparation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// parallel: x-quantized σ±/π jumps; perpendicular: z-quantized; rotating: Hermitian set
// {(2/3)I, (g/3)f_z, (g/3)√½ f_x, (g/3)√½ f_y} of the rotating-frame dissipator
enum class JumpAxis { parallel, perpendicular, rotating };

struct PumpModel {
  double gamma_s = 1.0;  // rates below are in units of gamma_s unless scaled by it
  JumpAxis axis = JumpAxis::parallel;
  bool project = true;  // microwave projection P onto span{↑,↓,≀}
};

inline constexpr double kGammaOp = 2.0 / 3.0;

// D(o) = −(2/9)o + (g²/9)(f_z o f_z + ½ f_y o f_y + ½ f_x o f_x)
CMat dissipate(const SpinSystem& sys, const CMat& o);
// 𝒩(o, a) = ½D({o,a}) − ½{D(o),a} − ½{o,D(a)}
CMat noise_superop(const SpinSystem& sys, const CMat& o, const CMat& a);

std::vector<CMat> jump_operators(JumpAxis axis, const SpinSystem& sys);
// Σ_q W_q ρ W_q† − Γ_op ρ
CMat jump_master(const std::vector<CMat>& jumps, const CMat& rho);
// d²×d² matrix of ρ -> Σ_q W_q ρ W_q† − Γ_op ρ acting on column-stacked ρ
CMat channel_superoperator(const std::vector<CMat>& jumps, int dim);

struct PumpRates {
  double gamma_op = kGammaOp;
  double flip = 0;       // ⟨↓|D(|↑⟩⟨↑|)|↓⟩
  double loss_up = 0;    // −Tr D(|↑⟩⟨↑|)
  double loss_down = 0;  // −Tr D(|↓⟩⟨↓|)
  double loss_up_literal = 0;  // Γ_op − Σ_q |⟨↑|W_q|↑⟩|²
};
PumpRates rates(const EmbeddedBasis& basis, const SpinSystem& sys, const PumpModel& model = {});

struct CoherenceDiagnostics {
  double c_up = 0;  // correlation-preservation figure C(↑)
  std::optional<double> t_up, n_up, mode_sum;
  bool mode_condition = true;
  bool keep_transfer = false;
};
CoherenceDiagnostics coherence_diagnostics(const EmbeddedBasis& basis, const SpinSystem& sys,
                                           const PumpModel& model = {});

// qutrit operator basis in the order X_du, Y_du, X_wd, Y_wd, X_uw, Y_uw (first two only
// when there is no transfer state)
struct QutritOperators {
  std::vector<std::string> labels;
  std::vector<CMat> ops;
  std::vector<CVec> states;  // ↑, ↓, ≀
  std::vector<CMat> pops;    // |ψ⟩⟨ψ|
};
QutritOperators qutrit_operators(const EmbeddedBasis& basis, bool with_transfer = true);

// Hilbert-Schmidt coefficient tables, per unit gamma_s
struct PumpTables {
  std::vector<std::string> labels;
  Eigen::MatrixXd drift;              // Tr(D(x_a) x_b)
  std::vector<Eigen::MatrixXd> noise;  // [ψ] Tr(𝒩(x_a, x_b) n_ψ)
  Eigen::MatrixXd pop;                // Tr(D(n_ψ) n_φ)
};
PumpTables coefficient_tables(const EmbeddedBasis& basis, const SpinSystem& sys, const PumpModel& model = {},
                              bool with_transfer = true);

// Gaussian-channel update for one step of γ_s dt = h
struct PumpUpdates {
  bool keep_transfer = true;
  double h = 0;
  Eigen::MatrixXd m_a;                  // I + h·drift on (X_du, Y_du[, X_wd, Y_wd])
  std::array<Eigen::MatrixXd, 3> n_a;   // h·noise[ψ] per unit population
  Eigen::Matrix3d j = Eigen::Matrix3d::Identity();  // I + h·popᵀ, N' = J N
  int modes() const { return static_cast<int>(m_a.rows()) / 2; }
  // noise summed over ψ ∈ {↑, ↓}
  Eigen::MatrixXd noise(const Eigen::Vector3d& pops) const;
};
PumpUpdates build_updates(const EmbeddedBasis& basis, const SpinSystem& sys, const PumpModel& model, double h,
                          bool keep_transfer);

inline constexpr double kMaxPumpStep = 1e-2;

}  // namespace squeeze
