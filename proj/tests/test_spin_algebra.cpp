#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "squeeze/params.hpp"
#include "squeeze/spin_algebra.hpp"

using namespace squeeze;

namespace {

const std::vector<double> kSpins = {0.5, 1, 1.5, 2, 3, 4};

double proj_dist(const CVec& a, const CVec& b) {
  return (a * a.adjoint() - b * b.adjoint()).norm();
}

double expect(const CVec& v, const CMat& op) { return v.dot(op * v).real(); }

}  // namespace

TEST_CASE("spin matrices: diagonal f_z for small f") {
  const auto s = spin_matrices(0.5);
  CHECK(s.dim == 2);
  CHECK(s.fz(0, 0).real() == doctest::Approx(0.5));
  CHECK(s.fz(1, 1).real() == doctest::Approx(-0.5));
  const auto s1 = spin_matrices(1);
  CHECK((s1.fz.diagonal().real() - Eigen::Vector3d(1, 0, -1)).norm() < 1e-15);
  CHECK(s1.g_f == doctest::Approx(1.0));
  CHECK(spin_matrices(1, Manifold::lower).g_f == doctest::Approx(0.5));
}

TEST_CASE("spin matrices: commutators, Casimir, hermiticity") {
  for (double f : kSpins) {
    const auto s = spin_matrices(f);
    const cd i(0, 1);
    CHECK((s.fx * s.fy - s.fy * s.fx - i * s.fz).norm() < 1e-12);
    CHECK((s.fy * s.fz - s.fz * s.fy - i * s.fx).norm() < 1e-12);
    CHECK((s.fz * s.fx - s.fx * s.fz - i * s.fy).norm() < 1e-12);
    const CMat cas = s.fx * s.fx + s.fy * s.fy + s.fz * s.fz;
    CHECK((cas - f * (f + 1) * CMat::Identity(s.dim, s.dim)).norm() < 1e-12);
    CHECK((s.fx - s.fx.adjoint()).norm() == 0.0);
    CHECK((s.fy - s.fy.adjoint()).norm() == 0.0);
  }
}

TEST_CASE("spin matrices: invalid f") {
  CHECK_THROWS_AS(spin_matrices(0.3), std::invalid_argument);
  CHECK_THROWS_AS(spin_matrices(0), std::invalid_argument);
  CHECK_THROWS_AS(spin_matrices(-1), std::invalid_argument);
}

TEST_CASE("xket is an f_x eigenvector") {
  for (double f : kSpins) {
    const auto s = spin_matrices(f);
    for (double m = f; m >= -f; m -= 1) {
      const CVec v = xket(s, m);
      CHECK(std::abs(v.norm() - 1) < 1e-12);
      CHECK((s.fx * v - m * v).norm() < 1e-12);
    }
  }
}

TEST_CASE("fiducial preparations") {
  SUBCASE("cat f=1") {
    const auto s = spin_matrices(1);
    const CVec c = prepare_fiducial(Prep::cat, s);
    CVec want = CVec::Zero(3);
    want(0) = want(2) = 1 / std::sqrt(2.0);
    CHECK(proj_dist(c, want) < 1e-12);
  }
  SUBCASE("scs f=1/2 is the m_x = 1/2 state") {
    const auto s = spin_matrices(0.5);
    const CVec v = prepare_fiducial(Prep::scs, s);
    CVec want(2);
    want << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    CHECK(proj_dist(v, want) < 1e-12);
  }
  SUBCASE("yurke alpha = 0 is m_z = 0") {
    const auto s = spin_matrices(2);
    CHECK(proj_dist(prepare_fiducial(Prep::yurke, s, 0.0), zket(s, 0)) < 1e-12);
  }
  SUBCASE("parity and alpha checks") {
    CHECK_THROWS_AS(prepare_fiducial(Prep::yurke, spin_matrices(1.5), 0.3), std::invalid_argument);
    CHECK_THROWS_AS(prepare_fiducial(Prep::half_yurke, spin_matrices(2), 0.3), std::invalid_argument);
    CHECK_THROWS_AS(prepare_fiducial(Prep::mx0, spin_matrices(1.5)), std::invalid_argument);
    CHECK_THROWS_AS(prepare_fiducial(Prep::yurke, spin_matrices(2)), std::invalid_argument);
  }
  SUBCASE("all normalized") {
    for (double f : kSpins) {
      const auto s = spin_matrices(f);
      CHECK(std::abs(prepare_fiducial(Prep::scs, s).norm() - 1) < 1e-12);
      CHECK(std::abs(prepare_fiducial(Prep::cat, s).norm() - 1) < 1e-12);
      if (is_integer_spin(f)) {
        CHECK(std::abs(prepare_fiducial(Prep::mx0, s).norm() - 1) < 1e-12);
        CHECK(std::abs(prepare_fiducial(Prep::yurke, s, 0.4).norm() - 1) < 1e-12);
      } else if (f >= 1.5) {
        CHECK(std::abs(prepare_fiducial(Prep::half_yurke, s, 0.4).norm() - 1) < 1e-12);
      }
    }
  }
}

TEST_CASE("embedded basis: SCS") {
  for (double f : kSpins) {
    const auto s = spin_matrices(f);
    const auto b = build_embedded_basis(prepare_fiducial(Prep::scs, s), s);
    CHECK(b.var_up == doctest::Approx(f / 2).epsilon(1e-12));
    CHECK(b.zeta_single == doctest::Approx(1.0).epsilon(1e-12));
    // coupled state i|f, m_x = f−1>
    CHECK(proj_dist(b.down, xket(s, f - 1)) < 1e-10);
    if (f >= 1) {
      REQUIRE(b.has_transfer());
      CHECK(proj_dist(*b.wr, xket(s, f - 2)) < 1e-10);
    } else {
      CHECK_FALSE(b.has_transfer());
    }
  }
}

TEST_CASE("embedded basis: coupled state phase follows the defining formula") {
  const auto s = spin_matrices(2);
  const CVec up = prepare_fiducial(Prep::scs, s);
  const auto b = build_embedded_basis(up, s);
  const CMat dfz = s.fz - expect(up, s.fz) * CMat::Identity(s.dim, s.dim);
  const CVec want = dfz * up / std::sqrt(b.var_up);
  CHECK((b.down - want).norm() < 1e-12);
}

TEST_CASE("embedded basis: cat and mx0") {
  for (double f : kSpins) {
    const auto s = spin_matrices(f);
    const auto b = build_embedded_basis(prepare_fiducial(Prep::cat, s), s);
    CHECK(b.var_up == doctest::Approx(f * f).epsilon(1e-12));
    CHECK(b.w_up == doctest::Approx(0).epsilon(1e-9));
    CHECK_FALSE(b.has_transfer());
    if (!is_integer_spin(f)) continue;
    const auto m = build_embedded_basis(prepare_fiducial(Prep::mx0, s), s);
    CHECK(m.var_up == doctest::Approx(f * (f + 1) / 2).epsilon(1e-12));
    // equal weight on |m_x = ±1>, nothing else
    CHECK(std::norm(xket(s, 1).dot(m.down)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::norm(xket(s, -1).dot(m.down)) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("embedded basis: orthonormality and f_z reconstruction") {
  const std::vector<Prep> preps = {Prep::scs, Prep::cat, Prep::mx0, Prep::yurke, Prep::half_yurke};
  for (double f : kSpins) {
    const auto s = spin_matrices(f);
    for (Prep p : preps) {
      if ((p == Prep::mx0 || p == Prep::yurke) && !is_integer_spin(f)) continue;
      if (p == Prep::half_yurke && (is_integer_spin(f) || f < 1.5)) continue;
      const bool needs_alpha = p == Prep::yurke || p == Prep::half_yurke;
      const CVec up = prepare_fiducial(p, s, needs_alpha ? std::optional<double>(0.37) : std::nullopt);
      const auto b = build_embedded_basis(up, s);
      CAPTURE(f);
      CHECK(std::abs(b.up.dot(b.down)) < 1e-12);
      CHECK(std::abs(b.down.norm() - 1) < 1e-12);
      CHECK(b.w_up >= 0);
      CHECK(b.v_up == doctest::Approx(std::sqrt(2 * b.var_up)).epsilon(1e-12));
      // ⟨↑|f_z|↓⟩ = v/√2, ⟨↓|f_z|≀⟩ = w/√2, ⟨↑|f_z|≀⟩ = 0
      CHECK(std::abs(b.up.dot(s.fz * b.down) - b.v_up / std::sqrt(2.0)) < 1e-12);
      if (b.has_transfer()) {
        const CVec& wr = *b.wr;
        CHECK(std::abs(b.up.dot(wr)) < 1e-12);
        CHECK(std::abs(b.down.dot(wr)) < 1e-12);
        CHECK(std::abs(b.down.dot(s.fz * wr) - b.w_up / std::sqrt(2.0)) < 1e-10);
        CHECK(std::abs(b.up.dot(s.fz * wr)) < 1e-12);
      } else {
        CHECK(b.w_up < 1e-9);
      }
      CHECK(b.fz_up == doctest::Approx(expect(b.up, s.fz)));
      CHECK(b.fx_up == doctest::Approx(expect(b.up, s.fx)));
    }
  }
}

TEST_CASE("embedded basis: errors") {
  const auto s = spin_matrices(2);
  CHECK_THROWS_AS(build_embedded_basis(zket(s, 1), s), NoCoupledState);
  CHECK_THROWS_AS(build_embedded_basis(2.0 * prepare_fiducial(Prep::scs, s), s), std::invalid_argument);
}

TEST_CASE("single-spin metrological parameter") {
  for (double f : {1.0, 2.0, 3.0, 4.0}) {
    const auto s = spin_matrices(f);
    for (double a : {0.1, 0.5, 1.0}) {
      const auto b = build_embedded_basis(prepare_fiducial(Prep::yurke, s, a), s);
      CHECK(b.zeta_single == doctest::Approx(1 / ((f + 1) * std::cos(a) * std::cos(a))).epsilon(1e-10));
    }
  }
  // a qubit cannot be squeezed
  const auto s = spin_matrices(0.5);
  for (int k = 0; k < 20; ++k) {
    const double th = 0.1 + 0.07 * k, ph = 0.3 * k;
    CVec v(2);
    v << std::cos(th / 2), std::exp(cd(0, ph)) * std::sin(th / 2);
    const auto b = build_embedded_basis(v, s);
    if (std::abs(b.fx_up) < 1e-6) continue;
    CHECK(b.zeta_single >= 1 - 1e-12);
  }
}

TEST_CASE("collective coupling xi") {
  ProtocolParams p;
  const double gdt = p.pulse_scatter();
  for (double f : {1.0, 2.0, 4.0}) {
    p.f = f;
    const auto s = spin_matrices(f);
    const auto scs = build_embedded_basis(prepare_fiducial(Prep::scs, s), s);
    const auto cat = build_embedded_basis(prepare_fiducial(Prep::cat, s), s);
    const auto mx0 = build_embedded_basis(prepare_fiducial(Prep::mx0, s), s);
    CHECK(collective_coupling_xi(scs, p) == doctest::Approx(gdt * p.od / (18 * f)).epsilon(1e-12));
    CHECK(collective_coupling_xi(cat, p) == doctest::Approx(gdt * p.od / 9).epsilon(1e-12));
    CHECK(collective_coupling_xi(mx0, p) == doctest::Approx(gdt * p.od * (f + 1) / (18 * f)).epsilon(1e-12));
  }
}

TEST_CASE("prep names round trip") {
  for (Prep p : {Prep::scs, Prep::cat, Prep::mx0, Prep::yurke, Prep::half_yurke})
    CHECK(parse_prep(to_string(p)) == p);
  CHECK_THROWS_AS(parse_prep("bogus"), std::invalid_argument);
}
