#pragma once

#include "json.hpp"

#include "longi/cavity_dynamics.hpp"
#include "longi/pulse_design.hpp"

namespace longi {

/// Bessel function of the first kind from its integral representation
/// J_n(z) = (i^{-n}/pi) int_0^pi e^{i z cos(theta)} cos(n theta) d theta,
/// evaluated by adaptive quadrature. Requires n >= 0.
double bessel_j(int n, double z);

/// Ascending series sum_k (-1)^k (z/2)^{2k+n} / (k! (k+n)!); accurate for |z| < 10.
double bessel_j_series(int n, double z);

/// Counter-diabatic amplitude g_z'(t) / omega_r multiplying -i sigma^z (a^dag - a).
double cd_amplitude(const Modulation& gz, double omega_r, double t);

/// Rotated-frame coupling g_z + g_z'' / omega_r^2.
Modulation effective_gz(const Modulation& gz, double omega_r);

struct FloquetSpec {
  double Omega = 1.0;
  double nu = 0.0;

  /// Throws InputError for nu <= 0, SingularCoefficientError at a zero of J_1.
  void validate() const;
  /// Warning-grade check that the drive is slow compared with omega_r.
  bool slow_compared_with(double omega_r) const { return nu < 0.1 * omega_r; }
};

struct FloquetAmplitudes {
  /// Multiplies (sigma^z + a^dag a).
  double diag_amp = 0.0;
  /// Multiplies sigma^z (a^dag + a).
  double coupling_amp = 0.0;
};

/// Floquet drive emulating the counter-diabatic term with the first harmonic
/// lambda(t) = C_1 cos(nu t), C_1 = g_z'(t) / (omega_r J_1(Omega)).
class FloquetDrive {
 public:
  FloquetDrive(Modulation gz, double omega_r, FloquetSpec spec);

  FloquetAmplitudes at(double t) const;
  double j1() const { return j1_; }
  const FloquetSpec& spec() const { return spec_; }
  const Modulation& gz() const { return gz_; }
  double omega_r() const { return omega_r_; }

  /// {Omega, nu, gz_ref, sign_convention}.
  nlohmann::json descriptor() const;

 private:
  Modulation gz_;
  double omega_r_;
  FloquetSpec spec_;
  double j1_;
};

FloquetAmplitudes floquet_drive(const Modulation& gz, double omega_r, const FloquetSpec& spec, double t);

struct MagnusAverage {
  Complex average;
  /// Target -i g_z'/omega_r that the a^dag coefficient must reproduce.
  Complex target;
  bool matches_cd = false;
};

/// Period average (1/T) int_0^T lambda(t) e^{-i Omega cos(nu t)} dt for
/// lambda(t) = coefficient * cos(harmonic * nu t), by quadrature, compared
/// with -i g_z'/omega_r to relative tolerance `tol`.
MagnusAverage magnus_average(double coefficient, const FloquetSpec& spec, double gz_dot,
                             double omega_r, int harmonic = 1, double tol = 1e-8);

}  // namespace longi
