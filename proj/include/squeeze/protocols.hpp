#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "squeeze/gaussian_core.hpp"
#include "squeeze/optical_pumping.hpp"
#include "squeeze/params.hpp"
#include "squeeze/spin_algebra.hpp"

namespace squeeze {

enum class Protocol { qnd, double_pass, eraser, phase_matching };
Protocol parse_protocol(const std::string& name);
std::string to_string(Protocol p);

enum class Target { scs, yurke, half_yurke };
Target parse_target(const std::string& name);
std::string to_string(Target t);

// reduced observables entering every post-processed squeezing parameter
struct Observables {
  double var_du = 0, var_wd = 0, cov = 0;
  Eigen::Vector3d pops = Eigen::Vector3d::Zero();
};
Observables observables(const GaussianState& s);

// ζ_m of the state mapped by the partial isometry onto the target basis.
// keep: 2f N (v'²V_du + 2v'w' C + w'²V_wd) / (Σ_ψ N_ψ ⟨f_x⟩'_ψ)²;
// drop: V_wd -> N_↓/2, C -> 0, N_≀ counted as lost.
double zeta_for_target(const Observables& o, const EmbeddedBasis& target, bool keep_transfer);

struct ZetaResult {
  double zeta = 0;
  std::optional<double> alpha;
  std::string diagnostic;
};
// Yurke targets search α on (0, π/2) unless given
ZetaResult squeezing_parameter(const Observables& o, Target target, double f, bool keep_transfer,
                               std::optional<double> alpha = std::nullopt);

double to_db(double zeta);
// SCS target basis at spin f, cached per thread
const EmbeddedBasis& scs_target_basis(double f);

// one run's model: basis, updates, couplings
struct ProtocolContext {
  ProtocolParams params;
  SpinSystem sys;
  EmbeddedBasis basis;
  PumpUpdates updates;
  double xi_up = 0, xi_down = 0;  // χ²(Δf_z²) per photon per atom
  double n_step = 0;               // photons per substep
  bool keep_transfer = true;
};
ProtocolContext make_context(Prep prep, const ProtocolParams& params, std::optional<bool> keep_transfer = std::nullopt,
                             std::optional<double> alpha = std::nullopt);
ProtocolContext make_context(const CVec& up, const ProtocolParams& params,
                             std::optional<bool> keep_transfer = std::nullopt);

GaussianState initial_state(const ProtocolContext& ctx);

GaussianState pump_step(const GaussianState& s, const PumpUpdates& u);
GaussianState faraday_step(const GaussianState& s, const ProtocolContext& ctx);
GaussianState qnd_step(const GaussianState& s, const ProtocolContext& ctx);
GaussianState double_pass_step(const GaussianState& s, const ProtocolContext& ctx, bool eraser);

// unit-normalized coherent maps of a single mode (no pumping)
GaussianState coherent_qnd(const GaussianState& s, double xi);
GaussianState coherent_double_pass(const GaussianState& s, double xi, bool eraser);
// n eraser double passes of strength xi/n each, rotated by θ = xi/(2n)
GaussianState coherent_phase_matching(double xi_total, int n);
// 2 × (smallest eigenvalue of the atomic 2×2 block)
double quadrature_zeta(const GaussianState& s);

struct Trajectory {
  std::vector<double> t;
  std::vector<double> var_du, var_wd, cov, n_up, n_down, n_wr;
  std::vector<double> zeta_m;     // chosen post-processing
  std::vector<double> zeta_drop;  // transfer state dropped
  std::vector<double> zeta_q;     // 2·min eig of the X_du/Y_du block over the commutator weight

  std::size_t size() const { return t.size(); }
  void push(double time, const Observables& o, double z, double zd, double zq);
  std::size_t peak_index() const;
  double peak_db() const;
  double peak_time() const;
  void write_csv(std::ostream& os) const;
};

struct SimulateOptions {
  Target target = Target::scs;
  std::optional<double> alpha;
  std::optional<bool> keep_transfer;  // default: from the coherence diagnostics
  int record_every = 1;
};

Trajectory simulate(Protocol protocol, Prep prep, const ProtocolParams& params, double t_max,
                    const SimulateOptions& opt = {});
Trajectory simulate(Protocol protocol, const ProtocolContext& ctx, double t_max, const SimulateOptions& opt = {});

// phase matching with θ chosen each step by bounded scalar minimization
Trajectory phase_matching_run(const ProtocolContext& ctx, int n_steps, const SimulateOptions& opt = {});

}  // namespace squeeze
