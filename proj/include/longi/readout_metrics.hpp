#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "longi/cavity_dynamics.hpp"

namespace longi {

/// Single-mode squeezing of the cavity input: parameter r, squeeze angle
/// theta, homodyne angle phi.
struct SqueezeSpec {
  double r = 0.0;
  double theta = 0.0;
  double phi = 0.0;

  void validate() const;
  /// Squeezing quoted in dB of variance reduction, 10 log10(e^{2r}).
  static SqueezeSpec from_db(double db, double theta, double phi);
};

struct SNRCurve {
  std::vector<double> taus;
  std::vector<double> signal;
  /// Noise variance of one qubit branch; both branches carry the same value.
  std::vector<double> noise_var;
  std::vector<double> snr;
  std::optional<SqueezeSpec> squeeze;
  double kappa = 0.0;
  double phi = 0.0;
};

/// Default homodyne angle: the quadrature along the imaginary displacement.
inline constexpr double kDefaultHomodyneAngle = 1.5707963267948966;

/// |<M_e>(tau) - <M_g>(tau)| with <M_k> = 2 kappa int_0^tau Re(alpha_k e^{-i phi}) dt,
/// integrating the trajectory samples with the trapezoid rule.
double homodyne_signal(const CavityTrajectory& traj, double phi, double tau);

/// Noise variance of one branch: kappa tau, or with squeezing
/// kappa tau (cosh 2r + sinh 2r cos 2(phi - theta)).
double noise_power(double kappa, double tau, const std::optional<SqueezeSpec>& sq = std::nullopt);

/// SNR(tau) = signal / sqrt(N_e + N_g) on an increasing tau grid. With a
/// squeeze spec its homodyne angle overrides `phi`.
SNRCurve snr_curve(const CavityTrajectory& traj, double phi, std::span<const double> taus,
                   const std::optional<SqueezeSpec>& sq = std::nullopt);

/// Least-squares slope of log SNR against log(kappa tau) over taus in
/// [tau_lo, tau_hi]. Needs at least 10 points, all with positive SNR.
double fit_scaling_exponent(const SNRCurve& curve, std::pair<double, double> window);

std::string snr_csv(const SNRCurve& curve);

}  // namespace longi
