#include <cmath>

#include "doctest.h"
#include "support.hpp"

#include "longi/cd_floquet.hpp"
#include "longi/errors.hpp"

using namespace longi;
using testing_support::kPi;

TEST_SUITE("cd_floquet") {

TEST_CASE("Bessel values at the origin and at one") {
  CHECK(bessel_j(0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(bessel_j(1, 0.0)) < 1e-15);
  // Reference value of J_1(1).
  CHECK(bessel_j(1, 1.0) == doctest::Approx(0.44005058574493355).epsilon(1e-12));
  CHECK(bessel_j_series(1, 1.0) == doctest::Approx(0.44005058574493355).epsilon(1e-14));
  CHECK_THROWS_AS(bessel_j(-1, 1.0), InputError);
}

TEST_CASE("integral and series Bessel forms agree") {
  for (int n = 0; n <= 5; ++n) {
    for (int k = -10; k <= 10; ++k) {
      const double z = 0.5 * k;
      CHECK(std::abs(bessel_j(n, z) - bessel_j_series(n, z)) < 1e-10);
    }
  }
}

TEST_CASE("counter-diabatic amplitude") {
  const double wr = 7.0, T = 2.0, A = 3.0;
  CHECK(cd_amplitude(Modulation::constant(4.0, T), wr, 1.0) == 0.0);
  const auto ramp = Modulation::polynomial({0.0, A}, T);
  CHECK(cd_amplitude(ramp, wr, 0.7) == doctest::Approx(A / (wr * T)));
  const auto p = SystemParams::reference_point();
  const auto gz = gz_from_gc(poly_modulation(p), p.omega_r);
  CHECK(std::abs(cd_amplitude(gz, p.omega_r, 0.5 * p.t_f)) < 1e-9 * p.g_z0);
}

TEST_CASE("effective coupling in the rotated frame") {
  const double wr = 10.0;
  const auto c = Modulation::constant(2.5, 1.0);
  CHECK(effective_gz(c, wr).value(0.3) == doctest::Approx(2.5));
  const double T = 1.0, w = kPi / T, A = 1.3;
  const auto s = Modulation::fourier_series({0, 0, 0, A}, T);
  const auto once = effective_gz(s, wr);
  const auto twice = effective_gz(once, wr);
  for (double t : {0.1, 0.4, 0.8}) {
    CHECK(once.value(t) == doctest::Approx(A * (1 - w * w / (wr * wr)) * std::sin(w * t)));
    const double r = w * w / (wr * wr);
    const double expect_gap = A * r * (1 - r) * std::sin(w * t);
    CHECK(twice.value(t) - once.value(t) == doctest::Approx(-expect_gap).epsilon(1e-9));
  }
}

TEST_CASE("Floquet drive nodes and Bessel divisor") {
  const auto p = SystemParams::reference_point();
  const auto gz = gz_from_gc(trig_modulation(p), p.omega_r);
  const FloquetSpec spec{1.0, 40 * kPi / p.t_f};
  const FloquetDrive drive(gz, p.omega_r, spec);
  CHECK(drive.j1() == doctest::Approx(0.4400506).epsilon(1e-7));
  const double t_node = kPi / (2 * spec.nu);
  CHECK(std::abs(drive.at(t_node).coupling_amp) < 1e-12 * p.g_z0);
  CHECK(drive.at(0.0).diag_amp == 0.0);
  const double t = 0.37 * p.t_f;
  const auto a = floquet_drive(gz, p.omega_r, spec, t);
  CHECK(a.diag_amp == doctest::Approx(spec.Omega * spec.nu * std::sin(spec.nu * t)));
  CHECK(a.coupling_amp ==
        doctest::Approx(gz.derivative(t, 1) * std::cos(spec.nu * t) / (p.omega_r * bessel_j_series(1, 1.0))));
  const auto d = drive.descriptor();
  for (const char* key : {"Omega", "nu", "gz_ref", "sign_convention"}) CHECK(d.contains(key));
}

TEST_CASE("Floquet spec validation") {
  CHECK_THROWS_AS(FloquetSpec({1.0, 0.0}).validate(), InputError);
  CHECK_THROWS_AS(FloquetSpec({3.8317059702075123, 1.0}).validate(), SingularCoefficientError);
  CHECK_THROWS_AS(FloquetSpec({0.0, 1.0}).validate(), SingularCoefficientError);
  CHECK(FloquetSpec({1.0, 1.0}).slow_compared_with(100.0));
  CHECK_FALSE(FloquetSpec({1.0, 50.0}).slow_compared_with(100.0));
}

TEST_CASE("first-harmonic average reproduces the counter-diabatic term") {
  const double wr = 2 * kPi * 6.6e9, gz_dot = 3.1e18;
  const FloquetSpec spec{1.0, 2 * kPi * 1e9};
  const double c1 = gz_dot / (wr * bessel_j_series(1, 1.0));
  const auto m = magnus_average(c1, spec, gz_dot, wr);
  CHECK(m.matches_cd);
  CHECK(std::abs(m.average) == doctest::Approx(gz_dot / wr).epsilon(1e-8));
  // The average itself, not only its magnitude, is -i g'/w.
  CHECK(m.average.real() == doctest::Approx(0.0).scale(gz_dot / wr).epsilon(1e-8));
  CHECK(m.average.imag() == doctest::Approx(-gz_dot / wr).epsilon(1e-8));
  // The opposite sign of C_1 gives +i g'/w and fails the match.
  CHECK_FALSE(magnus_average(-c1, spec, gz_dot, wr).matches_cd);
}

TEST_CASE("degenerate averages") {
  const FloquetSpec spec{1.0, 5.0};
  CHECK(std::abs(magnus_average(0.0, spec, 1.0, 10.0).average) == 0.0);
  const auto weak = magnus_average(1.0, FloquetSpec{1e-6, 5.0}, 1.0, 10.0);
  CHECK(std::abs(weak.average) < 1e-6);
}

TEST_CASE("property: only odd harmonics can match") {
  testing_support::Gen gen(41);
  for (int trial = 0; trial < 20; ++trial) {
    const FloquetSpec spec{gen.uniform(0.3, 2.5), gen.log_uniform(1.0, 1e3)};
    const double wr = gen.log_uniform(10, 1e3), gz_dot = gen.uniform(0.5, 5.0);
    for (int n = 1; n <= 4; ++n) {
      const double cn = gz_dot / (wr * std::abs(bessel_j_series(n, spec.Omega)));
      const auto m = magnus_average(cn, spec, gz_dot, wr, n);
      if (n % 2 == 0) {
        CHECK(std::abs(m.average.imag()) < 1e-10 * std::abs(m.average) + 1e-14);
        CHECK_FALSE(m.matches_cd);
      } else {
        CHECK(std::abs(m.average.real()) < 1e-10 * std::abs(m.average));
      }
    }
  }
}

}  // TEST_SUITE
