#include <cmath>

#include "doctest.h"
#include "support.hpp"

#include "longi/cavity_dynamics.hpp"
#include "longi/errors.hpp"
#include "longi/readout_metrics.hpp"

using namespace longi;
using testing_support::kPi;

namespace {

CavityTrajectory constant_trajectory(double g0, double kappa, double t_end, int points) {
  const auto m = Modulation::constant(g0, t_end);
  return make_trajectory(m, kappa, uniform_grid(t_end, points));
}

}  // namespace

TEST_SUITE("cavity_dynamics") {

TEST_CASE("zero drive leaves the cavity empty") {
  const auto grid = uniform_grid(1.0, 11);
  for (auto z : cavity_field(Modulation::constant(0.0, 1.0), 1.0, Branch::Excited, grid)) CHECK(std::abs(z) == 0.0);
}

TEST_CASE("constant drive without damping grows linearly") {
  const double g0 = 3.0, T = 2.0;
  const auto grid = uniform_grid(T, 21);
  const auto a = cavity_field(Modulation::constant(g0, T), 0.0, Branch::Excited, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(a[i].real() == doctest::Approx(0.0));
    CHECK(a[i].imag() == doctest::Approx(-g0 * grid[i]));
  }
}

TEST_CASE("constant drive with damping saturates") {
  const double g0 = 2.0, k = 3.0, T = 4.0;
  const auto grid = uniform_grid(T, 41);
  const auto e = cavity_field(Modulation::constant(g0, T), k, Branch::Excited, grid);
  const auto g = cavity_field(Modulation::constant(g0, T), k, Branch::Ground, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double closed = 2 * g0 / k * (1 - std::exp(-k * grid[i] / 2));
    CHECK(e[i].imag() == doctest::Approx(-closed).epsilon(1e-10));
    CHECK(g[i] == -e[i]);
  }
  CHECK(displacement_envelope(Modulation::constant(g0, T), k, T) ==
        doctest::Approx(2 * g0 / k * (1 - std::exp(-k * T / 2))).epsilon(1e-10));
}

TEST_CASE("non-increasing grid is rejected") {
  const std::vector<double> grid{0.0, 0.5, 0.5};
  CHECK_THROWS_AS(cavity_field(Modulation::constant(1.0, 1.0), 1.0, Branch::Excited, grid), InputError);
}

TEST_CASE("separation of an antisymmetric trajectory") {
  const auto traj = constant_trajectory(1.5, 2.0, 1.0, 11);
  const auto d = pointer_separation(traj);
  CHECK(d.front() == 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == doctest::Approx(2 * std::sqrt(2.0) * std::abs(traj.alpha_e[i])));
  CavityTrajectory zero{{0.0, 1.0}, {0.0, 0.0}, {0.0, 0.0}, 1.0};
  for (double v : pointer_separation(zero)) CHECK(v == 0.0);
}

TEST_CASE("design separation at t_f follows the envelope function") {
  const auto p = SystemParams::reference_point();
  const auto gc = poly_modulation(p);
  const auto traj = make_trajectory(gc, p.kappa, uniform_grid(p.t_f, 401));
  const double F = displacement_envelope(gc, p.kappa, p.t_f);
  CHECK(pointer_separation(traj).back() == doctest::Approx(2 * std::sqrt(p.kappa) * F).epsilon(1e-9));
  // Independent quadrature of the same envelope.
  const double I = testing_support::simpson([&](double s) { return gc.value(s) * std::exp(p.kappa * s / 2); }, 0.0,
                                            p.t_f);
  CHECK(F == doctest::Approx(std::exp(-p.kappa * p.t_f / 2) * I).epsilon(1e-10));
}

TEST_CASE("envelope approaches the displacement target for short protocols") {
  auto p = SystemParams::reference_point();
  p.t_f = 1e-6 / p.kappa;
  const double F = displacement_envelope(poly_modulation(p), p.kappa, p.t_f);
  CHECK(F == doctest::Approx(p.g_z0 * kPi / (2 * p.kappa)).epsilon(1e-6));
}

TEST_CASE("both designs reach the same displacement") {
  const auto p = SystemParams::reference_point();
  const double fp = displacement_envelope(poly_modulation(p), p.kappa, p.t_f);
  const double ft = displacement_envelope(trig_modulation(p), p.kappa, p.t_f);
  CHECK(std::abs(fp - ft) / fp < 5e-3);
}

TEST_CASE("property: field bounded by the leak-free build-up") {
  testing_support::Gen gen(21);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = SystemParams::reference_point();
    p.t_f = gen.log_uniform(1e-4, 1e-2) / p.kappa;
    const auto gc = trial % 2 ? poly_modulation(p) : trig_modulation(p);
    const auto grid = uniform_grid(p.t_f, 101);
    const auto e = cavity_field(gc, p.kappa, Branch::Excited, grid);
    const auto g = cavity_field(gc, p.kappa, Branch::Ground, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(g[i] == -e[i]);
      // e^{-kappa t/2} int g <= |alpha(t)| <= int g for non-negative g.
      const double pushed = grid[i] > 0 ? testing_support::simpson([&](double s) { return gc.value(s); }, 0.0, grid[i], 2000) : 0.0;
      CHECK(std::abs(e[i]) <= pushed * (1 + 1e-9) + 1e-12);
      CHECK(std::abs(e[i]) >= pushed * std::exp(-0.5 * p.kappa * grid[i]) * (1 - 1e-9) - 1e-12);
    }
  }
}

TEST_CASE("trajectory CSV columns") {
  const auto csv = trajectory_csv(constant_trajectory(1.0, 1.0, 1.0, 3));
  CHECK(csv.rfind("t,re_alpha_e,im_alpha_e,re_alpha_g,im_alpha_g,d\n", 0) == 0);
}

}  // TEST_SUITE

TEST_SUITE("readout_metrics") {

TEST_CASE("homodyne signal of special trajectories") {
  CavityTrajectory zero{{0.0, 1.0}, {0.0, 0.0}, {0.0, 0.0}, 1.0};
  CHECK(homodyne_signal(zero, 0.3, 1.0) == 0.0);
  const auto traj = constant_trajectory(2.0, 1.5, 1.0, 2001);
  CHECK(homodyne_signal(traj, 0.0, 1.0) == doctest::Approx(0.0).scale(1.0));
  // phi = pi/2: 4 kappa int |a|, with |a| = (2 g0 / k)(1 - e^{-k t/2}).
  const double k = 1.5, g0 = 2.0, tau = 0.8;
  const double closed = 4 * k * (2 * g0 / k) * (tau - 2 / k * (1 - std::exp(-k * tau / 2)));
  CHECK(homodyne_signal(traj, kPi / 2, tau) == doctest::Approx(closed).epsilon(1e-6));
  CHECK_THROWS_AS(homodyne_signal(traj, kPi / 2, 1.5), DomainError);
}

TEST_CASE("noise power with and without squeezing") {
  const double k = 2.0, tau = 3.0, r = 0.7;
  CHECK(noise_power(k, tau) == doctest::Approx(k * tau));
  CHECK(noise_power(k, tau, SqueezeSpec{0.0, 0.2, 0.9}) == doctest::Approx(k * tau));
  CHECK(noise_power(k, tau, SqueezeSpec{r, 0.0, kPi / 2}) == doctest::Approx(k * tau * std::exp(-2 * r)));
  CHECK(noise_power(k, tau, SqueezeSpec{r, 0.4, 0.4}) == doctest::Approx(k * tau * std::exp(2 * r)));
  CHECK_THROWS_AS(noise_power(k, -1.0), DomainError);
  CHECK_THROWS_AS(SqueezeSpec({-0.1, 0, 0}).validate(), InputError);
}

TEST_CASE("20 dB squeezing means e^{2r} = 100") {
  const auto s = SqueezeSpec::from_db(20.0, 0.0, kPi / 2);
  CHECK(std::exp(2 * s.r) == doctest::Approx(100.0));
  CHECK(s.r == doctest::Approx(std::log(10.0)));
}

TEST_CASE("SNR of zero modulation vanishes") {
  CavityTrajectory zero{{0.0, 0.5, 1.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, 1.0};
  const std::vector<double> taus{0.5, 1.0};
  for (double v : snr_curve(zero, kPi / 2, taus).snr) CHECK(v == 0.0);
}

TEST_CASE("squeezing along the signal quadrature multiplies SNR by e^r") {
  const auto p = SystemParams::reference_point();
  const auto traj = make_trajectory(trig_modulation(p), p.kappa, uniform_grid(p.t_f, 501));
  std::vector<double> taus;
  for (int i = 1; i <= 50; ++i) taus.push_back(p.t_f * i / 50);
  const SqueezeSpec sq{std::log(10.0), 0.0, kPi / 2};
  const auto vac = snr_curve(traj, kPi / 2, taus);
  const auto sqz = snr_curve(traj, kPi / 2, taus, sq);
  for (std::size_t i = 0; i < taus.size(); ++i) CHECK(sqz.snr[i] / vac.snr[i] == doctest::Approx(10.0).epsilon(1e-10));
}

TEST_CASE("designed pulses beat the constant-envelope baseline tenfold") {
  const auto p = SystemParams::reference_point();
  const auto grid = uniform_grid(p.t_f, 1001);
  const std::vector<double> taus{p.t_f};
  const double sta = snr_curve(make_trajectory(trig_modulation(p), p.kappa, grid), kPi / 2, taus).snr[0];
  const double base = snr_curve(make_trajectory(baseline(p), p.kappa, grid), kPi / 2, taus).snr[0];
  CHECK(sta / base >= 10.0);
}

TEST_CASE("exponent fit on synthetic power laws") {
  SNRCurve c;
  c.kappa = 2.0;
  for (int i = 1; i <= 50; ++i) {
    const double tau = 1e-3 * i;
    c.taus.push_back(tau);
    c.snr.push_back(std::pow(c.kappa * tau, 2.25));
  }
  CHECK(fit_scaling_exponent(c, {1e-3, 5e-2}) == doctest::Approx(2.25).epsilon(1e-12));
  for (std::size_t i = 0; i < c.taus.size(); ++i) c.snr[i] = 7.0 * c.kappa * c.taus[i];
  CHECK(fit_scaling_exponent(c, {1e-3, 5e-2}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_scaling_exponent(c, {1e-3, 5e-3}), FitError);
  c.snr[3] = 0.0;
  CHECK_THROWS_AS(fit_scaling_exponent(c, {1e-3, 5e-2}), FitError);
}

TEST_CASE("small-tau exponent of the designed pulses") {
  // g_c ~ t^3 gives SNR ~ tau^{4.5}; g_c ~ t gives tau^{2.5}.
  const auto p = SystemParams::reference_point();
  const auto grid = uniform_grid(p.t_f, 4001);
  std::vector<double> taus;
  for (int i = 1; i <= 40; ++i) taus.push_back(1e-3 * p.t_f * i);
  const std::pair<double, double> window{1e-3 * p.t_f, 4e-2 * p.t_f};
  const auto poly = snr_curve(make_trajectory(poly_modulation(p), p.kappa, grid), kPi / 2, taus);
  const auto trig = snr_curve(make_trajectory(trig_modulation(p), p.kappa, grid), kPi / 2, taus);
  CHECK(fit_scaling_exponent(poly, window) == doctest::Approx(4.5).epsilon(0.03));
  CHECK(fit_scaling_exponent(trig, window) == doctest::Approx(2.5).epsilon(0.03));
}

TEST_CASE("property: SNR invariances") {
  testing_support::Gen gen(31);
  const auto p = SystemParams::reference_point();
  const auto grid = uniform_grid(p.t_f, 301);
  const auto traj = make_trajectory(trig_modulation(p), p.kappa, grid);
  std::vector<double> taus;
  for (int i = 1; i <= 30; ++i) taus.push_back(p.t_f * i / 30);
  const auto ref = snr_curve(traj, kPi / 2, taus);
  for (int trial = 0; trial < 10; ++trial) {
    const double rot = gen.uniform(-kPi, kPi);
    CavityTrajectory turned = traj;
    for (auto& z : turned.alpha_e) z *= std::polar(1.0, rot);
    for (auto& z : turned.alpha_g) z *= std::polar(1.0, rot);
    const auto c = snr_curve(turned, kPi / 2 + rot, taus);
    for (std::size_t i = 0; i < taus.size(); ++i) CHECK(c.snr[i] == doctest::Approx(ref.snr[i]).epsilon(1e-9));
  }
  for (std::size_t i = 1; i < taus.size(); ++i) CHECK(ref.snr[i] >= ref.snr[i - 1]);
  auto q = p;
  q.g_z0 = 2 * p.g_z0;
  const auto doubled = snr_curve(make_trajectory(trig_modulation(q), q.kappa, grid), kPi / 2, taus);
  for (std::size_t i = 0; i < taus.size(); ++i) CHECK(doubled.snr[i] == doctest::Approx(2 * ref.snr[i]).epsilon(1e-12));
}

TEST_CASE("SNR CSV columns") {
  const auto traj = constant_trajectory(1.0, 1.0, 1.0, 11);
  const std::vector<double> taus{0.5, 1.0};
  CHECK(snr_csv(snr_curve(traj, kPi / 2, taus)).rfind("tau,signal,noise_var,snr", 0) == 0);
}

}  // TEST_SUITE
