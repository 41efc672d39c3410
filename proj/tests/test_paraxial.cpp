#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "squeeze/paraxial.hpp"

using namespace squeeze;
using std::numbers::pi;

namespace {

template <class F>
std::complex<double> radial(F fn, double rmax) {
  using boost::math::quadrature::gauss_kronrod;
  auto re = [&](double r) { return (fn(r) * (2 * pi * r)).real(); };
  auto im = [&](double r) { return (fn(r) * (2 * pi * r)).imag(); };
  return {gauss_kronrod<double, 61>::integrate(re, 0, rmax, 12, 1e-14),
          gauss_kronrod<double, 61>::integrate(im, 0, rmax, 12, 1e-14)};
}

// (1/A) ∫ u_p* u_q d²r
std::complex<double> overlap(int p, int q, double z, const BeamGeometry& b) {
  auto fn = [&](double r) { return std::conj(mode_function(p, 0, r, z, b)) * mode_function(q, 0, r, z, b); };
  return radial(fn, 10 * b.waist(z)) / b.area();
}

}  // namespace

TEST_CASE("beam geometry") {
  BeamGeometry b;
  CHECK(b.z_r() == doctest::Approx(pi * b.w0 * b.w0 / b.wavelength));
  CHECK(b.area() == doctest::Approx(pi * b.w0 * b.w0 / 2));
  CHECK(b.waist(b.z_r()) == doctest::Approx(std::sqrt(2.0) * b.w0));
  CHECK(b.gouy(b.z_r()) == doctest::Approx(pi / 4));
  CHECK(std::isinf(b.curvature_radius(0)));
  CHECK(b.sigma0() == doctest::Approx(3 * b.wavelength * b.wavelength / (2 * pi)));
}

TEST_CASE("mode normalization") {
  BeamGeometry b;
  CHECK(mode_function(0, 0, 0, 0, b).real() == doctest::Approx(1));
  CHECK(std::norm(mode_function(0, 0, 0, b.z_r(), b)) == doctest::Approx(0.5));
  for (double z : {0.0, 0.7 * b.z_r(), -1.3 * b.z_r()})
    for (int p = 0; p <= 3; ++p)
      for (int q = 0; q <= 3; ++q) {
        const auto o = overlap(p, q, z, b);
        CAPTURE(p);
        CAPTURE(q);
        CHECK(std::abs(o - (p == q ? 1.0 : 0.0)) < 1e-10);
      }
}

TEST_CASE("Laguerre integrals") {
  CHECK(laguerre_integral(2.0, {0}) == doctest::Approx(0.5));
  // L_1(s) = 1 − s
  CHECK(laguerre_integral(2.0, {1}) == doctest::Approx(0.5 - 0.25));
  CHECK(laguerre_integral(2.0, {1, 1}) == doctest::Approx(0.5 - 2 * 0.25 + 2 / 8.0));
  // orthonormality with unit weight
  CHECK(laguerre_integral(1.0, {2, 3}) == doctest::Approx(0).scale(1));
  CHECK(laguerre_integral(1.0, {3, 3}) == doctest::Approx(1));
}

TEST_CASE("projection tables") {
  BeamGeometry b;
  const auto t = projection_tables(b, 0, 2);
  CHECK(t.c(0, 0).real() == doctest::Approx(0.5));
  CHECK(std::abs(t.c(0, 0).imag()) < 1e-14);
  CHECK((t.c - t.c.adjoint()).norm() < 1e-12);
  CHECK(t.g.size() == 27u);
  // the tables at z follow from a direct overlap
  const double z = 0.4 * b.z_r();
  const auto tz = projection_tables(b, z, 2);
  auto fn = [&](double r) {
    const auto u0 = mode_function(0, 0, r, z, b);
    return std::norm(u0) * std::conj(u0) * mode_function(1, 0, r, z, b);
  };
  const auto c01 = radial(fn, 10 * b.waist(z)) / b.area();
  CHECK(std::abs(tz.c(0, 1) - c01) < 1e-9);
}

TEST_CASE("cloud geometry") {
  const auto c = CloudGeometry::from_atoms(9.8e6, 5e17, 256);
  CHECK(c.n_atoms() == doctest::Approx(9.8e6).epsilon(1e-10));
  CHECK(c.aspect_ratio() == doctest::Approx(256).epsilon(1e-12));
  CHECK(c.density(0, 0) == doctest::Approx(5e17));
  const auto d = CloudGeometry::from_atoms(9.8e6, 5e17, 4);
  CHECK(d.n_atoms() == doctest::Approx(9.8e6).epsilon(1e-10));
}

TEST_CASE("effective atom numbers") {
  BeamGeometry b;
  // a cloud far smaller than the beam sees u = 1: every N^{00(K)} is N
  CloudGeometry tiny = CloudGeometry::from_atoms(1e5, 1e25, 1);
  REQUIRE(tiny.sigma_perp < 1e-2 * b.w0);
  for (int k : {1, 2}) CHECK(effective_atom_number(tiny, b, 0, k).real() == doctest::Approx(1e5).epsilon(1e-3));
  // larger clouds see less
  const auto big = CloudGeometry::from_atoms(9.8e6, 5e17, 256);
  const double n1 = effective_atom_number(big, b, 0, 1).real();
  const double n2 = effective_atom_number(big, b, 0, 2).real();
  CHECK(n1 < 9.8e6);
  CHECK(n2 < n1);
  CHECK(od_eff(big, b) > 0);
}

TEST_CASE("lattice initial state") {
  BeamGeometry b;
  b.w0 = 28e-6;
  const auto cloud = CloudGeometry::from_atoms(9.8e6, 5e17, 300);
  for (double f : {0.5, 4.0}) {
    LatticeConfig cfg{61, 2, f, Prep::scs, true};
    const auto m = make_paraxial_model(cloud, b, cfg);
    const auto s = lattice_init(m);
    CHECK(s.k == 61);
    CHECK(s.p == 3);
    CHECK(s.n_theta == (f > 0.5 ? 2 : 1));
    CHECK((s.cov - s.cov.adjoint()).norm() < 1e-9 * s.cov.norm());
    std::complex<double> n00 = 0;
    for (int k = 0; k < s.k; ++k) n00 += s.pops[k](0, 0);
    CHECK(std::abs(n00.imag()) < 1e-9 * std::abs(n00));
    CHECK(n00.real() == doctest::Approx(m.n1).epsilon(1e-12));
    // slice sum approximates the continuum effective atom number
    CHECK(m.n1 == doctest::Approx(effective_atom_number(cloud, b, 0, 1).real()).epsilon(1e-2));
    CHECK(paraxial_zeta(m, s) == doctest::Approx(1).epsilon(1e-10));
  }
}

TEST_CASE("derivatives keep Hermiticity") {
  BeamGeometry b;
  const auto cloud = CloudGeometry::from_atoms(9.8e6, 5e17, 256);
  const auto m = make_paraxial_model(cloud, b, LatticeConfig{21, 2, 4, Prep::scs, true});
  const auto s = lattice_init(m);
  SpinWaveLattice d = s;
  spinwave_rhs(m, s, d);
  CHECK((d.cov - d.cov.adjoint()).norm() < 1e-9 * d.cov.norm());
}

TEST_CASE("short runs") {
  BeamGeometry b;
  const auto cloud = CloudGeometry::from_atoms(9.8e6, 5e17, 256);
  for (double f : {0.5, 4.0}) {
    const auto m = make_paraxial_model(cloud, b, LatticeConfig{21, 2, f, Prep::scs, true});
    const auto r = run_paraxial(m);
    CHECK(r.zeta.front() == doctest::Approx(1).epsilon(1e-10));
    CHECK(r.peak_db > 3);
    CHECK(r.t_peak > 0);
    CHECK(r.max_hermitian_defect < 1e-8);
    CHECK(r.max_imag_ratio < 1e-8);
  }
}

TEST_CASE("geometry scan output") {
  ScanConfig sc;
  sc.aspect_ratios = {64, 256};
  sc.waists = {31e-6};
  const auto pts = geometry_scan(sc);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].aspect_ratio == 64);
  CHECK(pts[1].w0 == 31e-6);
  std::ostringstream os;
  write_scan_csv(os, pts);
  CHECK(os.str().rfind("AR,w0_um,OD_eff,peak_dB,t_peak_gamma0", 0) == 0);
}
