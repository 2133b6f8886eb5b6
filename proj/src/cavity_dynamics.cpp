#include "longi/cavity_dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "longi/errors.hpp"
#include "longi/io.hpp"
#include "longi/quadrature.hpp"

namespace longi {

namespace {

void require_increasing(std::span<const double> grid) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw InputError("time grid must be strictly increasing");
  }
}

// Absolute quadrature tolerance 1e-10 * |g|_max * t_f, with |g|_max estimated
// from a coarse scan of the waveform.
double amplitude_scale(const Modulation& gc) {
  double peak = 0.0;
  constexpr int kScan = 257;
  for (int i = 0; i < kScan; ++i) {
    peak = std::max(peak, std::abs(gc.value(gc.t_f() * i / (kScan - 1))));
  }
  return peak > 0.0 ? peak : 1.0;
}

}  // namespace

std::vector<Complex> cavity_field(const Modulation& gc, double kappa, Branch branch,
                                  std::span<const double> grid) {
  require_increasing(grid);
  if (!(kappa >= 0.0)) throw InputError("kappa must be non-negative");
  std::vector<Complex> out;
  out.reserve(grid.size());
  if (grid.empty()) return out;

  const double tol = 1e-10 * amplitude_scale(gc) * gc.t_f();
  auto integrand = [&](double s) { return gc.value(s) * std::exp(0.5 * kappa * s); };
  const Complex prefactor(0.0, -sigma_z(branch));

  double accumulated = quad::adaptive_simpson(integrand, 0.0, grid[0], tol, 4);
  double previous = grid[0];
  for (double t : grid) {
    if (t > previous) {
      const double share = tol * (t - previous) / gc.t_f();
      accumulated += quad::adaptive_simpson(integrand, previous, t, share, 2);
      previous = t;
    }
    out.push_back(prefactor * std::exp(-0.5 * kappa * t) * accumulated);
  }
  return out;
}

CavityTrajectory make_trajectory(const Modulation& gc, double kappa, std::span<const double> grid) {
  CavityTrajectory traj;
  traj.times.assign(grid.begin(), grid.end());
  traj.alpha_e = cavity_field(gc, kappa, Branch::Excited, grid);
  // The ground branch is the exact negation: same integral, opposite sigma_z.
  traj.alpha_g.reserve(traj.alpha_e.size());
  for (const auto& a : traj.alpha_e) traj.alpha_g.push_back(-a);
  traj.kappa = kappa;
  return traj;
}

std::vector<double> pointer_separation(const CavityTrajectory& traj) {
  if (traj.alpha_e.size() != traj.times.size() || traj.alpha_g.size() != traj.times.size()) {
    throw DimensionError("trajectory branches do not match the time grid");
  }
  std::vector<double> d(traj.size());
  const double root_kappa = std::sqrt(traj.kappa);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    d[i] = root_kappa * std::abs(traj.alpha_e[i] - traj.alpha_g[i]);
  }
  return d;
}

double displacement_envelope(const Modulation& gc, double kappa, double t_f) {
  const double tol = 1e-12 * amplitude_scale(gc) * t_f;
  const double integral = quad::adaptive_simpson(
      [&](double s) { return gc.value(s) * std::exp(0.5 * kappa * s); }, 0.0, t_f, tol, 16);
  return std::exp(-0.5 * kappa * t_f) * integral;
}

std::string trajectory_csv(const CavityTrajectory& traj) {
  const auto d = pointer_separation(traj);
  io::CsvWriter csv({"t", "re_alpha_e", "im_alpha_e", "re_alpha_g", "im_alpha_g", "d"});
  for (std::size_t i = 0; i < traj.size(); ++i) {
    csv.row({traj.times[i], traj.alpha_e[i].real(), traj.alpha_e[i].imag(), traj.alpha_g[i].real(),
             traj.alpha_g[i].imag(), d[i]});
  }
  return csv.str();
}

}  // namespace longi
