#pragma once

#include <cmath>
#include <stdexcept>

namespace squeeze {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Physical inputs. Time is measured in units of 1/γ_s throughout.
struct ProtocolParams {
  double od = 300.0;
  double n_atoms = 1e6;
  double n_light = 3e8;  // photons per pulse
  double sigma0_over_a = 3e-4;
  double gamma_over_delta = 1e-3;
  double f = 4.0;
  double g_f = 0.0;      // 0 -> 1/f
  double step = 1e-3;    // γ_s dt per substep
  bool pumping = true;   // false: coherent limit (γ_s -> 0 with the same ξ per step)

  double lande() const { return g_f > 0 ? g_f : 1.0 / f; }
  double chi() const { return lande() * sigma0_over_a * gamma_over_delta / 6.0; }
  // γ_s Δt of one pulse of n_light photons
  double pulse_scatter() const {
    return n_light * sigma0_over_a * gamma_over_delta * gamma_over_delta / 4.0;
  }
  double photons_per_step() const { return n_light * step / pulse_scatter(); }
  // κ/γ_s = χ² N_L / (γ_s Δt)
  double kappa() const {
    const double g = lande();
    return g * g * sigma0_over_a / 9.0;
  }
  void validate() const {
    if (!(f > 0) || static_cast<double>(static_cast<int>(2 * f + 0.5)) != 2 * f)
      throw ValidationError("f must be a positive half-integer");
    if (!(n_atoms > 0) || !(n_light > 0) || !(sigma0_over_a > 0) || !(gamma_over_delta > 0))
      throw ValidationError("n_atoms, n_light, sigma0_over_a, gamma_over_delta must be positive");
    if (chi() >= 0.1) throw ValidationError("infeasible parameters: chi >= 0.1");
    if (!(step > 0) || step > 1e-2) throw ValidationError("step must satisfy 0 < gamma_s dt <= 1e-2");
    if (od > 0) {
      const double rel = std::abs(od - n_atoms * sigma0_over_a) / od;
      if (rel > 1e-9) throw ValidationError("od inconsistent with n_atoms * sigma0_over_a");
    }
  }
};

}  // namespace squeeze
