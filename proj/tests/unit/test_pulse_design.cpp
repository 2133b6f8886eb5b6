#include <cmath>

#include "doctest.h"
#include "support.hpp"

#include "longi/errors.hpp"
#include "longi/pulse_design.hpp"

using namespace longi;
using testing_support::kPi;

TEST_SUITE("pulse_design") {

TEST_CASE("reference parameters are the canonical readout point") {
  const auto p = SystemParams::reference_point();
  CHECK(p.kappa == doctest::Approx(2 * kPi * 1e6));
  CHECK(p.g_z0 / p.kappa == doctest::Approx(21.0));
  CHECK(p.omega_r == doctest::Approx(2 * kPi * 6.6e9));
  CHECK(p.t_f * p.kappa == doctest::Approx(kPi / 100));
  CHECK_FALSE(p.kappa_implausible());
  auto q = p;
  q.kappa = p.omega_r;
  CHECK(q.kappa_implausible());
}

TEST_CASE("invalid system parameters are rejected") {
  auto p = SystemParams::reference_point();
  p.kappa = 0;
  CHECK_THROWS_AS(p.validate(), InputError);
  p = SystemParams::reference_point();
  p.g_z0 = -1;
  CHECK_THROWS_AS(p.validate(), InputError);
  p = SystemParams::reference_point();
  p.t_f = -1;
  CHECK_THROWS_AS(p.validate(), InputError);
}

TEST_CASE("polynomial design vanishes at the ends and peaks at the midpoint") {
  const auto p = SystemParams::reference_point();
  CHECK(eval_poly_gc(p, 0.0) == 0.0);
  CHECK(eval_poly_gc(p, p.t_f) == 0.0);
  // -70 pi g (t_f/2)^3 (-t_f/2)^3 / (kappa t_f^7) = 35 pi g / (32 kappa t_f)
  const double mid = 35 * kPi * p.g_z0 / (32 * p.kappa * p.t_f);
  CHECK(eval_poly_gc(p, 0.5 * p.t_f) == doctest::Approx(mid).epsilon(1e-13));
  CHECK(eval_poly_gc(p, 0.5 * p.t_f) / p.kappa == doctest::Approx(2296.875).epsilon(1e-12));
  CHECK_THROWS_AS(eval_poly_gc(p, -1e-12), DomainError);
  CHECK_THROWS_AS(eval_poly_gc(p, 1.1 * p.t_f), DomainError);
}

TEST_CASE("trigonometric design at a third of the protocol") {
  const auto p = SystemParams::reference_point();
  CHECK(eval_trig_gc(p, 0.0) == 0.0);
  CHECK(std::abs(eval_trig_gc(p, p.t_f)) < 1e-12 * p.kappa);
  // Prefactor 3 g pi^2 / (2 kappa t_f) = 3150 pi kappa at these parameters.
  const double expected = 3150 * kPi * std::sin(kPi / 6) * std::pow(std::cos(kPi / 6), 5);
  const double v = eval_trig_gc(p, p.t_f / 3) / p.kappa;
  CHECK(v == doctest::Approx(expected).epsilon(1e-12));
  // The closed form evaluates to 2410.37; a commonly quoted 2410.7 is a rounding slip.
  CHECK(v == doctest::Approx(2410.37).epsilon(2e-6));
  CHECK_THROWS_AS(eval_trig_gc(p, 2 * p.t_f), DomainError);
}

TEST_CASE("trigonometric modulation equals its sine-series expansion") {
  const auto p = SystemParams::reference_point();
  const auto m = trig_modulation(p);
  const auto f = m.to_fourier();
  const double A = 3 * p.g_z0 * kPi * kPi / (2 * p.kappa * p.t_f);
  for (int i = 0; i <= 20; ++i) {
    const double t = p.t_f * i / 20;
    const double x = kPi * t / p.t_f;
    const double series = A / 32 * (5 * std::sin(x) + 4 * std::sin(2 * x) + std::sin(3 * x));
    CHECK(m.value(t) == doctest::Approx(series).epsilon(1e-12).scale(A));
    CHECK(f.value(t) == doctest::Approx(series).epsilon(1e-12).scale(A));
    CHECK(f.derivative(t, 2) == doctest::Approx(m.derivative(t, 2)).epsilon(1e-10).scale(A * 100 / (p.t_f * p.t_f)));
  }
}

TEST_CASE("gz_from_gc: constant and slow sine") {
  const auto p = SystemParams::reference_point();
  const auto c = Modulation::constant(3.0, p.t_f);
  const auto gz = gz_from_gc(c, p.omega_r);
  for (double t : {0.0, 0.3 * p.t_f, p.t_f}) CHECK(gz.value(t) == doctest::Approx(3.0));

  // A sin(w t) with w = pi / T as a one-term sine series.
  const double T = 1e-6, A = 2.0, w = kPi / T, wr = 50 * w;
  const auto s = Modulation::fourier_series({0, 0, 0, A}, T);
  const auto sz = gz_from_gc(s, wr);
  for (int i = 0; i <= 10; ++i) {
    const double t = T * i / 10;
    CHECK(sz.value(t) == doctest::Approx(A * (1 - w * w / (wr * wr)) * std::sin(w * t)).scale(A));
  }
}

TEST_CASE("gz_from_gc on sampled data needs five points") {
  CHECK_THROWS_AS(gz_from_gc(Modulation::sampled({0, 1, 2, 3}, 1.0), 10.0), ResolutionError);
  const auto q = Modulation::sampled({0, 1, 4, 9, 16, 25, 36}, 6.0);  // t^2 on [0, 6]
  const auto qz = gz_from_gc(q, 2.0);
  CHECK(qz.value(3.0) == doctest::Approx(9.0 + 2.0 / 4.0));
}

TEST_CASE("coupling follows the auxiliary waveform for a fast resonator") {
  const auto p = SystemParams::reference_point();
  const auto gc = poly_modulation(p);
  const auto gz = gz_from_gc(gc, p.omega_r);
  double dev = 0, peak = 0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = p.t_f * i / 1000;
    dev = std::max(dev, std::abs(gz.value(t) - gc.value(t)));
    peak = std::max(peak, std::abs(gc.value(t)));
  }
  CHECK(dev / peak < 1e-3);
}

TEST_CASE("boundary report for the polynomial design") {
  const auto p = SystemParams::reference_point();
  const auto r = verify_boundaries(poly_modulation(p), p);
  CHECK(r.passed);
  CHECK(r.displacement_integral == doctest::Approx(1.0).epsilon(1e-9));
  // Independent check of the normalization: int t^3 (t_f - t)^3 = t_f^7 / 140.
  const double I = testing_support::simpson([&](double t) { return eval_poly_gc(p, t); }, 0.0, p.t_f);
  CHECK(I / (p.g_z0 * kPi / (2 * p.kappa)) == doctest::Approx(1.0).epsilon(1e-12));
  for (double res : r.residuals) CHECK(res < 1e-9);
}

TEST_CASE("trigonometric design meets every boundary condition except the initial slope") {
  const auto p = SystemParams::reference_point();
  const auto r = verify_boundaries(trig_modulation(p), p);
  CHECK(r.displacement_integral == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.residuals[0] < 1e-12);
  CHECK(r.residuals[1] < 1e-9);
  CHECK(r.residuals[3] < 1e-9);
  CHECK(r.residuals[4] < 1e-9);
  CHECK(r.residuals[5] < 1e-9);
  // t_f g'(0) / g_z0 = t_f A pi / (2 t_f g_z0) = 3 pi^3 / (4 kappa t_f) = 75 pi^2.
  CHECK(r.residuals[2] == doctest::Approx(75 * kPi * kPi).epsilon(1e-10));
  CHECK_FALSE(r.passed);
}

TEST_CASE("half-sine waveform fails on its initial slope") {
  const auto p = SystemParams::reference_point();
  const auto m = Modulation::fourier_series({0, 0, 0, p.g_z0}, p.t_f);
  const auto r = verify_boundaries(m, p);
  CHECK_FALSE(r.passed);
  CHECK(r.residuals[2] == doctest::Approx(kPi));
}

TEST_CASE("constant baseline") {
  const auto p = SystemParams::reference_point();
  for (double t : {0.0, 0.25 * p.t_f, p.t_f}) CHECK(baseline_modulation(p, t) == p.g_z0);
  CHECK(baseline(p).value(0.7 * p.t_f) == p.g_z0);
}

TEST_CASE("modulation JSON round trip") {
  const auto p = SystemParams::reference_point();
  for (const auto& m : {poly_modulation(p), trig_modulation(p), baseline(p),
                        Modulation::fourier_series({1, 0, 2, 3}, 1.0), Modulation::sampled({0, 1, 0.5}, 2.0),
                        Modulation::bang_bang(2.0, {0.25, 0.5}, 1.0)}) {
    const auto back = Modulation::from_json(m.to_json());
    CHECK(back == m);
  }
  CHECK_THROWS_AS(Modulation::from_json(nlohmann::json::array()), InputError);
}

TEST_CASE("bang-bang waveform switches at the given times") {
  const auto m = Modulation::bang_bang(2.0, {0.25, 0.5}, 1.0);
  CHECK(m.value(0.1) == 2.0);
  CHECK(m.value(0.3) == 0.0);
  CHECK(m.value(0.7) == 2.0);
  CHECK(m.derivative(0.1, 1) == 0.0);
}

TEST_CASE("modulation CSV has the documented header") {
  const auto m = Modulation::constant(1.5, 1.0);
  const auto grid = uniform_grid(1.0, 3);
  const auto csv = modulation_csv(m, grid);
  CHECK(csv.rfind("t_seconds,value_rad_per_s\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("property: Euler-Lagrange closure for random designs") {
  testing_support::Gen gen(11);
  for (int trial = 0; trial < 30; ++trial) {
    SystemParams p = SystemParams::reference_point();
    p.kappa = gen.log_uniform(1e5, 1e8);
    p.g_z0 = gen.uniform(0.1, 50) * p.kappa;
    p.t_f = gen.log_uniform(1e-3, 1.0) / p.kappa;
    p.omega_r = gen.log_uniform(20, 1e4) / p.t_f;
    for (const auto& gc : {poly_modulation(p), trig_modulation(p)}) {
      const auto gz = gz_from_gc(gc, p.omega_r);
      double worst = 0, peak = 0;
      for (int i = 0; i < 1000; ++i) {
        const double t = p.t_f * i / 999;
        worst = std::max(worst, std::abs(gc.derivative(t, 2) + p.omega_r * p.omega_r * (gc.value(t) - gz.value(t))));
        peak = std::max(peak, std::abs(gc.value(t)));
      }
      CHECK(worst / (p.omega_r * p.omega_r * peak) < 1e-8);
    }
  }
}

TEST_CASE("property: designs are non-negative with flat polynomial ends") {
  testing_support::Gen gen(12);
  for (int trial = 0; trial < 20; ++trial) {
    SystemParams p = SystemParams::reference_point();
    p.t_f = gen.log_uniform(1e-3, 1.0) / p.kappa;
    const auto poly = poly_modulation(p);
    const auto trig = trig_modulation(p);
    for (int i = 0; i <= 200; ++i) {
      const double t = p.t_f * i / 200;
      CHECK(poly.value(t) >= -1e-9 * p.g_z0);
      CHECK(trig.value(t) >= -1e-9 * p.g_z0);
    }
    for (int order = 0; order <= 2; ++order) {
      const double scale = p.g_z0 / std::pow(p.t_f, order);
      CHECK(std::abs(poly.derivative(0.0, order)) < 1e-9 * scale);
      CHECK(std::abs(poly.derivative(p.t_f, order)) < 1e-9 * scale);
    }
    const auto r = verify_boundaries(poly, p);
    CHECK(r.displacement_integral == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(verify_boundaries(trig, p).displacement_integral == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("property: time-rate scaling covariance") {
  testing_support::Gen gen(13);
  const auto p = SystemParams::reference_point();
  for (int trial = 0; trial < 20; ++trial) {
    const double s = gen.log_uniform(0.1, 10);
    SystemParams q = p;
    q.t_f = s * p.t_f;
    q.kappa = p.kappa / s;
    const double t = gen.uniform(0, p.t_f);
    CHECK(eval_poly_gc(q, s * t) == doctest::Approx(eval_poly_gc(p, t)).epsilon(1e-11));
    CHECK(eval_trig_gc(q, s * t) == doctest::Approx(eval_trig_gc(p, t)).epsilon(1e-11));
  }
}

}  // TEST_SUITE
