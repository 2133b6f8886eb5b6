#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace longi {

namespace constants {
inline constexpr double hbar = 1.054571817e-34;         // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
/// Reduced flux quantum hbar / 2e.
inline constexpr double phi0 = hbar / (2.0 * elementary_charge);
}  // namespace constants

/// Transmon-SQUID-resonator parameters. Energies are angular frequencies
/// (hbar = 1); L_r is in henry.
struct CircuitParams {
  double E_J = 0.0;
  double E_C = 0.0;
  double E_Sigma = 0.0;
  double d_asym = 0.0;
  double n_g = 0.0;
  /// Transmon junction flux; E_J is taken as already evaluated at this flux.
  double phi_x = 0.0;
  /// SQUID flux, entering through squid_energy.
  double varphi_x = 0.0;
  double L_r = 0.0;
  double omega_r = 0.0;
  int n_cut = 20;

  /// E_C > 0, 0 <= d_asym < 1, n_cut >= 10.
  void validate() const;
  /// E_J/2pi = 20 GHz, E_C = E_J/67, E_Sigma = 1.5 E_J, d = 0.02, n_g = 0.5,
  /// both fluxes pi/4, omega_r/2pi = 6.6 GHz, omega_r L_r = 200 kOhm.
  static CircuitParams reference_point();

  /// E_J + E_JS(varphi_x).
  double E_Jtilde() const;

  nlohmann::json to_json() const;
  static CircuitParams from_json(const nlohmann::json& j);
};

/// Asymmetric SQUID: E_Sigma cos(x) sqrt(1 + d^2 tan^2 x), evaluated in the
/// equivalent form E_Sigma sqrt(cos^2 x + d^2 sin^2 x) that stays finite at cos x = 0.
double squid_energy(double E_Sigma, double d_asym, double varphi_x);

/// cos(theta) = (|n><n+1| + h.c.) / 2 on charges -n_cut..n_cut.
Eigen::MatrixXd cos_theta_matrix(int n_cut);

/// E_C (n - n_g)^2 - E_Jtilde cos(theta) in the charge basis n = -n_cut..n_cut.
Eigen::MatrixXd transmon_matrix(const CircuitParams& cp);

struct TransmonSpectrum {
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;
};

TransmonSpectrum diagonalize(const CircuitParams& cp);

/// alpha_k = Tr[sigma^k M] / 2 for M = cos(theta) restricted to the two lowest
/// eigenstates, |e> = level 1 carrying sigma^z = +1.
struct PauliProjection {
  double alpha_x = 0.0;
  double alpha_y = 0.0;
  double alpha_z = 0.0;
  double alpha_I = 0.0;
  std::vector<std::string> warnings;
};

PauliProjection pauli_projection(const CircuitParams& cp);

/// (omega_q / 2 phi0) sqrt(hbar omega_r L_r / 2), in rad/s.
double gz_estimate(double omega_q, double omega_r, double L_r);

struct DerivedFrequencies {
  /// sqrt(E_C^2 + d E_Sigma^2), the closed expression quoted for the design point.
  double omega_q_quoted = 0.0;
  /// E_1 - E_0 of transmon_matrix.
  double omega_q_exact = 0.0;
  double E_Jtilde = 0.0;
  /// omega_q_exact - omega_q_quoted.
  double discrepancy = 0.0;
};

DerivedFrequencies derived_frequencies(const CircuitParams& cp);

/// Report of computed values against the quoted design targets.
nlohmann::json circuit_report(const CircuitParams& cp);

struct SpectrumSweep {
  std::vector<double> varphi;
  /// levels[i][k]: k-th eigenvalue at varphi[i].
  std::vector<std::vector<double>> levels;
  std::vector<PauliProjection> projections;

  std::string csv() const;
};

SpectrumSweep spectrum_sweep(const CircuitParams& base, std::span<const double> varphi_grid, int levels = 4);

/// Largest ratio |E_k(x_{i+1}) - E_k(x_i)| / |E_JS(x_{i+1}) - E_JS(x_i)| over the sweep
/// (at most 1 for every level, 2 for transition frequencies, by Hellmann-Feynman);
/// intervals where E_JS does not move are skipped. Grids should contain the
/// extrema of E_JS (multiples of pi/2) so that it is monotone between nodes.
double flatness_ratio(const CircuitParams& base, const SpectrumSweep& sweep);

}  // namespace longi
