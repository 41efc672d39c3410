#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "squeeze/protocols.hpp"

using namespace squeeze;
using Eigen::MatrixXd;

namespace {

ProtocolParams reference_params(double f) {
  ProtocolParams p;
  p.f = f;
  return p;
}

double fz_variance(const GaussianState& s, const EmbeddedBasis& b) {
  const double v = b.v_up, w = b.w_up;
  return v * v * s.sigma(0, 0) + 2 * v * w * s.sigma(0, 2) + w * w * s.sigma(2, 2);
}

}  // namespace

TEST_CASE("names round trip") {
  for (Protocol p : {Protocol::qnd, Protocol::double_pass, Protocol::eraser, Protocol::phase_matching})
    CHECK(parse_protocol(to_string(p)) == p);
  for (Target t : {Target::scs, Target::yurke, Target::half_yurke}) CHECK(parse_target(to_string(t)) == t);
  CHECK_THROWS_AS(parse_protocol("nope"), std::invalid_argument);
  CHECK_THROWS_AS(parse_target("nope"), std::invalid_argument);
}

TEST_CASE("coherent QND composes additively") {
  const double xi = 0.37;
  GaussianState s = unit_vacuum(true);
  double prev = quadrature_zeta(s);
  for (int n = 1; n <= 50; ++n) {
    s = coherent_qnd(s, xi);
    const double z = quadrature_zeta(s);
    CHECK(1 / z == doctest::Approx(1 + n * xi).epsilon(1e-13));
    CHECK(z <= prev);
    prev = z;
  }
  // zero coupling
  CHECK((coherent_qnd(unit_vacuum(true), 0).sigma - unit_vacuum(true).sigma).norm() == 0.0);
}

TEST_CASE("coherent double pass limits") {
  // no eraser → 2/ξ, eraser → 1/ξ²
  const double big = 400;
  CHECK(quadrature_zeta(coherent_double_pass(unit_vacuum(true), big, false)) * big / 2 ==
        doctest::Approx(1).epsilon(0.01));
  const double z30 = quadrature_zeta(coherent_double_pass(unit_vacuum(true), 30, true));
  CHECK(z30 * 900 == doctest::Approx(1).epsilon(0.02));
  CHECK((coherent_double_pass(unit_vacuum(true), 0, true).sigma - unit_vacuum(true).sigma).norm() < 1e-15);
}

TEST_CASE("coherent phase matching is exponential") {
  const double z = quadrature_zeta(coherent_phase_matching(3.0, 1000));
  CHECK(z / std::exp(-3.0) == doctest::Approx(1).epsilon(0.01));
  // one step is a plain eraser pass after the θ = ξ/2 rotation
  GaussianState r = unit_vacuum(true);
  r = apply_symplectic(r, rotation_map(r, 0.25));
  const auto one = coherent_double_pass(r, 0.5, true);
  CHECK((coherent_phase_matching(0.5, 1).sigma - one.sigma).norm() < 1e-15);
}

TEST_CASE("SCS-target reference and single-spin factors") {
  for (double f : {0.5, 1.0, 2.0, 4.0}) {
    const auto v = vacuum_state(1e6, 1e7, 2);
    CHECK(squeezing_parameter(observables(v), Target::scs, f, true).zeta == doctest::Approx(1).epsilon(1e-14));
    CHECK(squeezing_parameter(observables(v), Target::scs, f, false).zeta == doctest::Approx(1).epsilon(1e-14));
    const auto& b = scs_target_basis(f);
    CHECK(b.fx_up - b.fx_down == doctest::Approx(1).epsilon(1e-12));
    if (f >= 1) CHECK(b.fx_wr == doctest::Approx(f - 2).epsilon(1e-12));
  }
  // Yurke target on the vacuum is the single-spin value 1/((f+1)cos²α)
  const auto v = observables(vacuum_state(1e6, 1e7, 2));
  const auto y = squeezing_parameter(v, Target::yurke, 4, false, 0.3);
  CHECK(y.zeta == doctest::Approx(1 / (5 * std::cos(0.3) * std::cos(0.3))).epsilon(1e-12));
  REQUIRE(y.alpha.has_value());
  const auto bad = squeezing_parameter(v, Target::yurke, 4, false, 0.0);
  CHECK(std::isinf(bad.zeta));
  CHECK_FALSE(bad.diagnostic.empty());
}

TEST_CASE("coherent-limit QND with the SCS gives 1/(1+ξ)") {
  auto p = reference_params(2);
  p.pumping = false;
  const auto ctx = make_context(Prep::scs, p);
  const auto tr = simulate(Protocol::qnd, ctx, 0.2);
  const double xi_step = ctx.xi_up * ctx.n_step * p.n_atoms;
  for (std::size_t k = 0; k < tr.size(); ++k)
    CHECK(tr.zeta_m[k] == doctest::Approx(1 / (1 + xi_step * k)).epsilon(1e-9));
  for (std::size_t k = 1; k < tr.size(); ++k) CHECK(tr.zeta_q[k] <= tr.zeta_q[k - 1] * (1 + 1e-12));
}

TEST_CASE("coherent limit: ζ_m = ζ_m^↑ ζ_q") {
  for (Prep prep : {Prep::mx0, Prep::scs}) {
    auto p = reference_params(2);
    p.pumping = false;
    const auto ctx = make_context(prep, p);
    GaussianState s = initial_state(ctx);
    for (int k = 0; k < 100; ++k) s = qnd_step(s, ctx);
    const double zm = zeta_for_target(observables(s), ctx.basis, false);
    CHECK(zm == doctest::Approx(ctx.basis.zeta_single * quadrature_zeta(s)).epsilon(1e-10));
  }
}

TEST_CASE("pump step") {
  const auto ctx = make_context(Prep::cat, reference_params(2));
  const GaussianState s0 = initial_state(ctx);
  auto off = reference_params(2);
  off.pumping = false;
  const auto c0 = make_context(Prep::cat, off);
  const auto same = qnd_step(s0, c0);
  CHECK(same.pops == s0.pops);
  // cat populations: eigenvalues −1/9 and −3/9
  GaussianState s = s0;
  const double n = s0.pops(0);
  for (int k = 1; k <= 2000; ++k) {
    s = pump_step(s, ctx.updates);
    if (k % 500 == 0) {
      const double t = k * ctx.params.step;
      CHECK(s.pops(0) / n == doctest::Approx(0.5 * (std::exp(-t / 9) + std::exp(-t / 3))).epsilon(1e-3));
    }
  }
}

TEST_CASE("SCS f=1: pumping leaves Var F_z stationary at t=0") {
  const auto ctx = make_context(Prep::scs, reference_params(1));
  const GaussianState s0 = initial_state(ctx);
  const auto s1 = pump_step(s0, ctx.updates);
  const double h = ctx.params.step, n = ctx.params.n_atoms;
  // closed f = 1 equation: dV/dt = γ(−2V/9 + N/9) = 0 at V = N/2
  CHECK(std::abs(fz_variance(s1, ctx.basis) - fz_variance(s0, ctx.basis)) < 1e-3 * h * n);
}

TEST_CASE("maps emitted by the protocols are symplectic") {
  const auto ctx = make_context(Prep::scs, reference_params(4));
  GaussianState s = initial_state(ctx);
  for (int k = 0; k < 200; ++k) s = qnd_step(s, ctx);
  const MatrixXd f = faraday_population(ctx.xi_up, ctx.xi_down, s.pops, ctx.n_step, s.atomic_modes);
  CHECK(symplectic_defect(f, s.commutator_weights()) < 1e-9);
  CHECK(symplectic_defect(rotation_map(s, 0.7), s.commutator_weights()) < 1e-12);
  Eigen::VectorXd w = s.commutator_weights();
  CHECK(symplectic_defect(waveplate_map(s), w) < 1e-12);
}

TEST_CASE("randomized step sequences stay physical") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> op(0, 3);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  const std::vector<std::pair<Prep, double>> cases = {
      {Prep::scs, 0.5}, {Prep::scs, 2}, {Prep::cat, 2}, {Prep::mx0, 2}, {Prep::mx0, 4}, {Prep::scs, 4}};
  int checked = 0;
  for (int seq = 0; seq < 60; ++seq) {
    const auto [prep, f] = cases[seq % cases.size()];
    const auto ctx = make_context(prep, reference_params(f));
    GaussianState s = initial_state(ctx);
    for (int k = 0; k < 40; ++k) {
      switch (op(rng)) {
        case 0: s = qnd_step(s, ctx); break;
        case 1: s = double_pass_step(s, ctx, false); break;
        case 2: s = double_pass_step(s, ctx, true); break;
        default: s = apply_symplectic(s, rotation_map(s, ang(rng))); break;
      }
      CHECK(is_physical(s));
      ++checked;
    }
  }
  CHECK(checked == 2400);
}

TEST_CASE("keeping the transfer state is never worse") {
  for (double f : {2.0, 3.0, 4.0})
    for (Prep prep : {Prep::scs, Prep::mx0}) {
      const auto p = reference_params(f);
      const auto keep = simulate(Protocol::qnd, make_context(prep, p, true), 3.0, {Target::scs, {}, true, 5});
      const auto drop = simulate(Protocol::qnd, make_context(prep, p, false), 3.0, {Target::scs, {}, false, 5});
      CAPTURE(f);
      CHECK(keep.peak_db() >= drop.peak_db());
    }
}

TEST_CASE("population totals do not increase for f > 1/2") {
  const auto ctx = make_context(Prep::mx0, reference_params(2));
  const auto tr = simulate(Protocol::qnd, ctx, 1.0, {Target::scs, {}, {}, 10});
  for (std::size_t k = 1; k < tr.size(); ++k) {
    CHECK(tr.t[k] > tr.t[k - 1]);
    CHECK(tr.n_up[k] + tr.n_down[k] + tr.n_wr[k] <= tr.n_up[k - 1] + tr.n_down[k - 1] + tr.n_wr[k - 1] + 1e-6);
  }
}

TEST_CASE("step-size convergence of the QND peak") {
  auto p = reference_params(4);
  const double a = simulate(Protocol::qnd, Prep::mx0, p, 3.0).peak_db();
  p.step /= 2;
  const double b = simulate(Protocol::qnd, Prep::mx0, p, 3.0).peak_db();
  CHECK(std::abs(a - b) < 0.05);
}

TEST_CASE("trajectory CSV") {
  const auto tr = simulate(Protocol::qnd, Prep::scs, reference_params(2), 0.01);
  std::ostringstream os;
  tr.write_csv(os);
  const std::string csv = os.str();
  CHECK(csv.rfind("t,varXdu,varXwd,cov,N_up,N_down,N_wr,zeta_m,zeta_m_dB", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(tr.size() + 1));
}

TEST_CASE("invalid parameters") {
  auto p = reference_params(2);
  p.step = 0.05;
  CHECK_THROWS_AS(make_context(Prep::scs, p), ValidationError);
  p = reference_params(2);
  p.od = 10;
  CHECK_THROWS_AS(make_context(Prep::scs, p), ValidationError);
  p = reference_params(2);
  p.gamma_over_delta = 5e3;
  CHECK_THROWS_AS(make_context(Prep::scs, p), ValidationError);
}
