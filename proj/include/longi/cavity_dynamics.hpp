#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "longi/pulse_design.hpp"

namespace longi {

using Complex = std::complex<double>;

/// Qubit branch selected by <sigma^z>.
enum class Branch : int { Excited = +1, Ground = -1 };

inline double sigma_z(Branch b) { return static_cast<double>(static_cast<int>(b)); }

/// Mean cavity field <a(t)> for both qubit branches on a common time grid.
struct CavityTrajectory {
  std::vector<double> times;
  std::vector<Complex> alpha_e;
  std::vector<Complex> alpha_g;
  double kappa = 0.0;

  std::size_t size() const { return times.size(); }
};

/// <a(t)> = -i sigma_z e^{-kappa t/2} int_0^t g_c(s) e^{kappa s/2} ds on an
/// increasing grid inside [0, t_f], by cumulative adaptive Simpson quadrature.
/// Throws InputError for a non-increasing grid.
std::vector<Complex> cavity_field(const Modulation& gc, double kappa, Branch branch,
                                  std::span<const double> grid);

CavityTrajectory make_trajectory(const Modulation& gc, double kappa, std::span<const double> grid);

/// d(t) = sqrt(kappa) |alpha_e(t) - alpha_g(t)|.
std::vector<double> pointer_separation(const CavityTrajectory& traj);

/// F(kappa, t_f) = e^{-kappa t_f/2} int_0^{t_f} g_c(s) e^{kappa s/2} ds.
double displacement_envelope(const Modulation& gc, double kappa, double t_f);

/// CSV with columns t, Re/Im alpha_e, Re/Im alpha_g, d.
std::string trajectory_csv(const CavityTrajectory& traj);

}  // namespace longi
