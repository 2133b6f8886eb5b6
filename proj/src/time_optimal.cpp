#include "longi/time_optimal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "longi/errors.hpp"
#include "longi/io.hpp"

namespace longi {

namespace {
constexpr double kPi = std::numbers::pi;

void require_rate(double omega_r) {
  if (!(omega_r > 0.0)) throw InputError("omega_r must be positive");
}

void require_grid(std::span<const double> grid) {
  for (double t : grid) {
    if (!(t >= 0.0)) throw DomainError("control grid times must be non-negative");
  }
}
}  // namespace

void ControlProblem::validate() const {
  if (!(u_max > 0.0)) throw InputError("u_max must be positive");
  require_rate(omega_r);
  if (target_displacement < 0.0) throw InputError("target displacement must be non-negative");
  for (double v : {start[0], start[1], end[0], end[1]}) {
    if (!std::isfinite(v)) throw InputError("boundary states must be finite");
  }
  if (k_max < 1) throw InputError("k_max must be at least 1");
}

ControlProblem ControlProblem::from_system(const SystemParams& p, double u_max) {
  p.validate();
  ControlProblem cp;
  cp.u_max = u_max;
  cp.omega_r = p.omega_r;
  cp.target_displacement = p.g_z0 * kPi / (2.0 * p.kappa);
  return cp;
}

PhaseTrajectory bang_trajectory(double u_max, double omega_r, std::span<const double> grid) {
  require_rate(omega_r);
  require_grid(grid);
  PhaseTrajectory out;
  for (double t : grid) {
    out.times.push_back(t);
    out.first.push_back(u_max * (1.0 - std::cos(omega_r * t)));
    out.second.push_back(omega_r * u_max * std::sin(omega_r * t));
  }
  return out;
}

PhaseTrajectory adjoint_trajectory(double p_d0, double p_g0, double omega_r, std::span<const double> grid) {
  require_rate(omega_r);
  require_grid(grid);
  const double a = p_d0;
  const double b = -p_g0 / omega_r;
  PhaseTrajectory out;
  for (double t : grid) {
    const double c = std::cos(omega_r * t), s = std::sin(omega_r * t);
    out.times.push_back(t);
    out.first.push_back(omega_r * (a * s - b * c));  // p_g
    out.second.push_back(a * c + b * s);             // p_d
  }
  return out;
}

double arc_invariant(double g_c, double g_d, double u, double omega_r) {
  require_rate(omega_r);
  const double x = g_c - u, y = g_d / omega_r;
  return x * x + y * y;
}

std::vector<double> switch_times(const PhaseTrajectory& adjoint) {
  std::vector<double> out;
  const auto& phi = adjoint.second;
  for (std::size_t i = 0; i + 1 < phi.size(); ++i) {
    if ((phi[i] < 0.0 && phi[i + 1] > 0.0) || (phi[i] > 0.0 && phi[i + 1] < 0.0)) {
      const double w = phi[i] / (phi[i] - phi[i + 1]);
      out.push_back(adjoint.times[i] + w * (adjoint.times[i + 1] - adjoint.times[i]));
    } else if (phi[i + 1] == 0.0 && i + 2 < phi.size() && phi[i] * phi[i + 2] < 0.0) {
      out.push_back(adjoint.times[i + 1]);
    }
  }
  return out;
}

nlohmann::json MinimalTimeReport::to_json() const {
  return {{"t_zero_return", t_zero_return},
          {"t_quoted", t_quoted},
          {"displacement_per_arc", displacement_per_arc},
          {"displacement_delivered", displacement_delivered},
          {"k", k},
          {"t_min", t_min},
          {"feasible", feasible}};
}

void MinimalTimeReport::require_feasible() const {
  if (!feasible) {
    throw InfeasibleError("target needs " + std::to_string(k) + " zero-return arcs, above k_max");
  }
}

MinimalTimeReport minimal_time(const ControlProblem& problem) {
  problem.validate();
  MinimalTimeReport r;
  const double period = 2.0 * kPi / problem.omega_r;
  r.t_zero_return = period;
  r.t_quoted = kPi / (2.0 * problem.omega_r);
  // int_0^T u (1 - cos w t) dt = u T over whole periods.
  r.displacement_per_arc = problem.u_max * period;
  if (problem.target_displacement <= 0.0) {
    r.k = 0;
  } else {
    const double arcs = std::min(problem.target_displacement / r.displacement_per_arc, 2e9);
    r.k = static_cast<int>(std::ceil(arcs * (1.0 - 1e-14)));
    r.k = std::max(r.k, 1);
  }
  r.t_min = r.k * period;
  r.displacement_delivered = problem.u_max * r.t_min;
  r.feasible = r.k <= problem.k_max;
  return r;
}

}  // namespace longi
