#include "longi/cd_floquet.hpp"

#include <cmath>
#include <numbers>

#include "longi/errors.hpp"
#include "longi/quadrature.hpp"

namespace longi {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSingularJ1 = 1e-12;
}  // namespace

double bessel_j(int n, double z) {
  if (n < 0) throw InputError("bessel_j needs n >= 0");
  const Complex integral = quad::adaptive_simpson(
      [&](double theta) { return std::exp(Complex(0.0, z * std::cos(theta))) * std::cos(n * theta); },
      0.0, kPi, 1e-15, 16);
  // i^{-n} = (-i)^n
  const Complex phase = std::pow(Complex(0.0, -1.0), n);
  return (phase * integral).real() / kPi;
}

double bessel_j_series(int n, double z) {
  if (n < 0) throw InputError("bessel_j_series needs n >= 0");
  const double half = 0.5 * z;
  double term = 1.0;
  for (int k = 1; k <= n; ++k) term *= half / k;
  double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= -half * half / (static_cast<double>(k) * (k + n));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

double cd_amplitude(const Modulation& gz, double omega_r, double t) {
  if (!(omega_r > 0.0)) throw InputError("omega_r must be positive");
  return gz.derivative(t, 1) / omega_r;
}

Modulation effective_gz(const Modulation& gz, double omega_r) {
  // Same map as the Euler-Lagrange design step: f -> f + f'' / omega_r^2.
  return gz_from_gc(gz, omega_r);
}

void FloquetSpec::validate() const {
  if (!(nu > 0.0)) throw InputError("Floquet frequency nu must be positive");
  if (std::abs(bessel_j_series(1, Omega)) < kSingularJ1) {
    throw SingularCoefficientError("Omega sits at a zero of J_1; the Floquet coefficient diverges");
  }
}

FloquetDrive::FloquetDrive(Modulation gz, double omega_r, FloquetSpec spec)
    : gz_(std::move(gz)), omega_r_(omega_r), spec_(spec) {
  if (!(omega_r > 0.0)) throw InputError("omega_r must be positive");
  spec_.validate();
  j1_ = bessel_j(1, spec_.Omega);
}

FloquetAmplitudes FloquetDrive::at(double t) const {
  const double phase = spec_.nu * t;
  return {spec_.Omega * spec_.nu * std::sin(phase),
          gz_.derivative(t, 1) * std::cos(phase) / (omega_r_ * j1_)};
}

nlohmann::json FloquetDrive::descriptor() const {
  return {{"Omega", spec_.Omega},
          {"nu", spec_.nu},
          {"gz_ref", gz_.to_json()},
          {"sign_convention", "C1 = +dg_z/dt / (omega_r J1(Omega)); period average of "
                              "lambda exp(-i Omega cos nu t) equals -i dg_z/dt / omega_r"}};
}

FloquetAmplitudes floquet_drive(const Modulation& gz, double omega_r, const FloquetSpec& spec, double t) {
  return FloquetDrive(gz, omega_r, spec).at(t);
}

MagnusAverage magnus_average(double coefficient, const FloquetSpec& spec, double gz_dot,
                             double omega_r, int harmonic, double tol) {
  if (!(spec.nu > 0.0)) throw InputError("Floquet frequency nu must be positive");
  if (!(omega_r > 0.0)) throw InputError("omega_r must be positive");
  const double period = 2.0 * kPi / spec.nu;
  const Complex integral = quad::adaptive_simpson(
      [&](double t) {
        const double lambda = coefficient * std::cos(harmonic * spec.nu * t);
        return lambda * std::exp(Complex(0.0, -spec.Omega * std::cos(spec.nu * t)));
      },
      0.0, period, 1e-15 * std::max(std::abs(coefficient), 1e-300) * period, 32);
  MagnusAverage out;
  out.average = integral / period;
  out.target = Complex(0.0, -gz_dot / omega_r);
  const double scale = std::max(std::abs(out.target), 1e-300);
  out.matches_cd = std::abs(out.average - out.target) <= tol * scale;
  return out;
}

}  // namespace longi
