#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace longi {

/// Physical constants of the readout problem. All rates are angular
/// frequencies in rad/s, times in seconds.
struct SystemParams {
  double omega_q = 0.0;
  double omega_r = 0.0;
  double kappa = 0.0;
  double g_z0 = 0.0;
  double t_f = 0.0;

  /// Throws InputError if omega_r, kappa or t_f are not positive or g_z0 < 0.
  void validate() const;
  /// Plausibility guard: true when kappa > omega_r / 10.
  bool kappa_implausible() const { return kappa > omega_r / 100.0 * 10.0; }

  /// kappa/2pi = 1 MHz, g_z0/2pi = 21 MHz, omega_r/2pi = 6.6 GHz, t_f = pi/(100 kappa).
  static SystemParams reference_point();

  /// Same parameters with a different duration.
  SystemParams with_duration(double duration) const;
};

enum class ModulationKind { Polynomial, Trigonometric, FourierSeries, Sampled, ConstantBaseline, BangBang };

std::string_view to_string(ModulationKind kind);
ModulationKind modulation_kind_from_string(std::string_view name);

/// A time-dependent coupling waveform on [0, t_f].
///
/// Coefficient layout per kind:
///  - Polynomial: b_k of sum_k b_k s^k over normalized time s = t / t_f.
///  - Trigonometric: {A} for A sin(pi t / 2t_f) cos^5(pi t / 2t_f).
///  - FourierSeries: {c_0, d_0, c_1, d_1, ...}, the term m contributing
///    c_m cos(m pi t / t_f) + d_m sin(m pi t / t_f). d_0 has no effect.
///  - ConstantBaseline: {g}.
///  - BangBang: {u_max, s_1, s_2, ...}: u_max on [0, s_1), 0 on [s_1, s_2), ...
///  - Sampled: no coefficients; uniform samples over [0, t_f] instead.
///
/// Closed-form kinds differentiate analytically to any order. Sampled
/// modulations interpolate linearly and differentiate with second-order
/// centered differences (one-sided at the ends). BangBang is piecewise
/// constant, so all its derivatives vanish away from the switch times.
class Modulation {
 public:
  static Modulation polynomial(std::vector<double> normalized_coeffs, double t_f);
  static Modulation trigonometric(double amplitude, double t_f);
  static Modulation fourier_series(std::vector<double> coeffs, double t_f);
  static Modulation sampled(std::vector<double> values, double t_f);
  static Modulation constant(double value, double t_f);
  static Modulation bang_bang(double u_max, std::vector<double> switch_times, double t_f);

  ModulationKind kind() const { return kind_; }
  std::span<const double> coefficients() const { return coefficients_; }
  double t_f() const { return t_f_; }
  const std::vector<double>& samples() const { return samples_; }

  double value(double t) const { return derivative(t, 0); }
  /// order-th time derivative at t; throws DomainError for t outside [0, t_f].
  double derivative(double t, int order) const;
  std::vector<double> sample(std::span<const double> times, int order = 0) const;

  /// Exact sine/cosine series representation (Trigonometric, FourierSeries,
  /// ConstantBaseline only).
  Modulation to_fourier() const;

  nlohmann::json to_json() const;
  static Modulation from_json(const nlohmann::json& j);

  bool operator==(const Modulation&) const = default;

 private:
  Modulation(ModulationKind kind, std::vector<double> coeffs, double t_f,
             std::vector<double> samples = {});

  double check_time(double t) const;
  double sampled_derivative(double t, int order) const;

  ModulationKind kind_;
  std::vector<double> coefficients_;
  double t_f_;
  std::vector<double> samples_;
};

/// Polynomial design: -70 pi g_z0 t^3 (t - t_f)^3 / (kappa t_f^7).
double eval_poly_gc(const SystemParams& p, double t);
/// Trigonometric design: (3 g_z0 pi^2 / (2 kappa t_f)) sin(pi t / 2t_f) cos^5(pi t / 2t_f).
double eval_trig_gc(const SystemParams& p, double t);
/// Constant envelope g_z0 used as the comparison baseline.
double baseline_modulation(const SystemParams& p, double t);

Modulation poly_modulation(const SystemParams& p);
Modulation trig_modulation(const SystemParams& p);
Modulation baseline(const SystemParams& p);

/// Physical coupling g_z = g_c + g_c'' / omega_r^2 from the auxiliary waveform.
Modulation gz_from_gc(const Modulation& gc, double omega_r);

struct BoundaryReport {
  /// g_c(0), g_c(t_f), t_f g_c'(0), t_f g_c'(t_f), t_f^2 g_c''(0), t_f^2 g_c''(t_f),
  /// each divided by g_z0 and taken in absolute value.
  std::array<double, 6> residuals{};
  /// Integral of g_c over [0, t_f] divided by g_z0 pi / (2 kappa).
  double displacement_integral = 0.0;
  double tolerance = 0.0;
  bool passed = false;

  nlohmann::json to_json() const;
};

inline constexpr double kDefaultBoundaryTolerance = 1e-6;

BoundaryReport verify_boundaries(const Modulation& m, const SystemParams& p,
                                 double tol = kDefaultBoundaryTolerance);

/// Uniform grid of `points` samples on [0, t_end].
std::vector<double> uniform_grid(double t_end, int points);

/// Sample any modulation onto a uniform grid and return it as a Sampled one.
Modulation resample(const Modulation& m, int points);

/// Two-column CSV "t_seconds,value_rad_per_s" over the given grid.
std::string modulation_csv(const Modulation& m, std::span<const double> times);

}  // namespace longi
