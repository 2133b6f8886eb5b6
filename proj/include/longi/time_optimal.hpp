#pragma once

#include <array>
#include <span>
#include <vector>

#include "json.hpp"

#include "longi/pulse_design.hpp"

namespace longi {

/// Minimal-time problem for x = (g_c, g_d = g_c') driven by
/// g_d' = omega_r^2 (u - g_c) with 0 <= u <= u_max.
struct ControlProblem {
  double u_max = 0.0;
  double omega_r = 0.0;
  double target_displacement = 0.0;
  std::array<double, 2> start{0.0, 0.0};
  std::array<double, 2> end{0.0, 0.0};
  int k_max = 1000;

  void validate() const;
  /// Target g_z0 pi / (2 kappa) with the given coupling bound.
  static ControlProblem from_system(const SystemParams& p, double u_max);
};

/// Coupling bound quoted for the circuit design, 2pi x 2.57 GHz.
inline constexpr double kQuotedCouplingBound = 2.0 * 3.14159265358979323846 * 2.57e9;

struct PhaseTrajectory {
  std::vector<double> times;
  std::vector<double> first;
  std::vector<double> second;
};

/// u = u_max arc from (0, 0): g_c = u (1 - cos w t), g_d = w u sin w t.
PhaseTrajectory bang_trajectory(double u_max, double omega_r, std::span<const double> grid);

/// Adjoint pair (p_g, p_d) with p_d = A cos w t + B sin w t, A = p_d0,
/// B = -p_g0 / w, p_g = -p_d'. The switching function is p_d.
PhaseTrajectory adjoint_trajectory(double p_d0, double p_g0, double omega_r, std::span<const double> grid);

/// (g_c - u)^2 + (g_d / w)^2, conserved along an arc of constant u.
double arc_invariant(double g_c, double g_d, double u, double omega_r);

/// Sign changes of the switching function, located by linear interpolation.
std::vector<double> switch_times(const PhaseTrajectory& adjoint);

struct MinimalTimeReport {
  double t_zero_return = 0.0;
  double t_quoted = 0.0;
  double displacement_per_arc = 0.0;
  double displacement_delivered = 0.0;
  int k = 0;
  double t_min = 0.0;
  bool feasible = true;

  nlohmann::json to_json() const;
  /// Throws InfeasibleError when k exceeds k_max.
  void require_feasible() const;
};

/// Repeats the zero-return arc (period 2 pi / w, displacement u_max 2 pi / w)
/// until the target is met. Also reports pi / (2 w) for comparison.
MinimalTimeReport minimal_time(const ControlProblem& problem);

}  // namespace longi
