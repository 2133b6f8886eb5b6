#include "longi/pulse_design.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "longi/errors.hpp"
#include "longi/io.hpp"
#include "longi/quadrature.hpp"

namespace longi {

namespace {

constexpr double kPi = std::numbers::pi;

// Relative slack on the [0, t_f] support check.
constexpr double kTimeSlack = 1e-12;

double falling_factorial(int k, int j) {
  double r = 1.0;
  for (int i = 0; i < j; ++i) r *= static_cast<double>(k - i);
  return r;
}

// d^order/dt^order of cos(w t) and sin(w t).
double cos_derivative(double w, double t, int order) {
  return std::pow(w, order) * std::cos(w * t + order * kPi / 2.0);
}
double sin_derivative(double w, double t, int order) {
  return std::pow(w, order) * std::sin(w * t + order * kPi / 2.0);
}

}  // namespace

void SystemParams::validate() const {
  if (!(omega_r > 0.0)) throw InputError("omega_r must be positive");
  if (!(kappa > 0.0)) throw InputError("kappa must be positive");
  if (!(t_f > 0.0)) throw InputError("t_f must be positive");
  if (!(g_z0 >= 0.0)) throw InputError("g_z0 must be non-negative");
  if (!std::isfinite(omega_q)) throw InputError("omega_q must be finite");
}

SystemParams SystemParams::reference_point() {
  SystemParams p;
  p.kappa = 2.0 * kPi * 1e6;
  p.g_z0 = 2.0 * kPi * 21e6;
  p.omega_r = 2.0 * kPi * 6.6e9;
  p.omega_q = 2.0 * kPi * 3.28e9;
  p.t_f = kPi / (100.0 * p.kappa);
  return p;
}

SystemParams SystemParams::with_duration(double duration) const {
  SystemParams p = *this;
  p.t_f = duration;
  return p;
}

std::string_view to_string(ModulationKind kind) {
  switch (kind) {
    case ModulationKind::Polynomial: return "Polynomial";
    case ModulationKind::Trigonometric: return "Trigonometric";
    case ModulationKind::FourierSeries: return "FourierSeries";
    case ModulationKind::Sampled: return "Sampled";
    case ModulationKind::ConstantBaseline: return "ConstantBaseline";
    case ModulationKind::BangBang: return "BangBang";
  }
  return "?";
}

ModulationKind modulation_kind_from_string(std::string_view name) {
  for (auto k : {ModulationKind::Polynomial, ModulationKind::Trigonometric,
                 ModulationKind::FourierSeries, ModulationKind::Sampled,
                 ModulationKind::ConstantBaseline, ModulationKind::BangBang}) {
    if (to_string(k) == name) return k;
  }
  throw InputError("unknown modulation kind '" + std::string(name) + "'");
}

Modulation::Modulation(ModulationKind kind, std::vector<double> coeffs, double t_f,
                       std::vector<double> samples)
    : kind_(kind), coefficients_(std::move(coeffs)), t_f_(t_f), samples_(std::move(samples)) {
  if (!(t_f_ > 0.0) || !std::isfinite(t_f_)) throw InputError("modulation duration must be positive");
}

Modulation Modulation::polynomial(std::vector<double> normalized_coeffs, double t_f) {
  if (normalized_coeffs.empty()) normalized_coeffs.push_back(0.0);
  return Modulation(ModulationKind::Polynomial, std::move(normalized_coeffs), t_f);
}

Modulation Modulation::trigonometric(double amplitude, double t_f) {
  return Modulation(ModulationKind::Trigonometric, {amplitude}, t_f);
}

Modulation Modulation::fourier_series(std::vector<double> coeffs, double t_f) {
  if (coeffs.size() % 2 != 0) throw InputError("Fourier series needs paired {c_m, d_m} coefficients");
  return Modulation(ModulationKind::FourierSeries, std::move(coeffs), t_f);
}

Modulation Modulation::sampled(std::vector<double> values, double t_f) {
  if (values.size() < 2) throw ResolutionError("sampled modulation needs at least 2 samples");
  return Modulation(ModulationKind::Sampled, {}, t_f, std::move(values));
}

Modulation Modulation::constant(double value, double t_f) {
  return Modulation(ModulationKind::ConstantBaseline, {value}, t_f);
}

Modulation Modulation::bang_bang(double u_max, std::vector<double> switch_times, double t_f) {
  if (!std::is_sorted(switch_times.begin(), switch_times.end())) {
    throw InputError("bang-bang switch times must be sorted");
  }
  std::vector<double> coeffs{u_max};
  coeffs.insert(coeffs.end(), switch_times.begin(), switch_times.end());
  return Modulation(ModulationKind::BangBang, std::move(coeffs), t_f);
}

double Modulation::check_time(double t) const {
  const double slack = kTimeSlack * t_f_;
  if (!(t >= -slack && t <= t_f_ + slack)) {
    throw DomainError("time " + io::number(t) + " outside [0, " + io::number(t_f_) + "]");
  }
  return std::clamp(t, 0.0, t_f_);
}

double Modulation::derivative(double t, int order) const {
  if (order < 0) throw InputError("derivative order must be non-negative");
  t = check_time(t);
  switch (kind_) {
    case ModulationKind::Polynomial: {
      const double s = t / t_f_;
      const int n = static_cast<int>(coefficients_.size());
      double acc = 0.0;
      for (int k = n - 1; k >= order; --k) {
        acc = acc * s + coefficients_[k] * falling_factorial(k, order);
      }
      return acc / std::pow(t_f_, order);
    }
    case ModulationKind::Trigonometric: {
      const double a = coefficients_[0];
      if (order == 0) {
        const double x = kPi * t / (2.0 * t_f_);
        return a * std::sin(x) * std::pow(std::cos(x), 5);
      }
      return to_fourier().derivative(t, order);
    }
    case ModulationKind::FourierSeries: {
      double acc = 0.0;
      const std::size_t terms = coefficients_.size() / 2;
      for (std::size_t m = 0; m < terms; ++m) {
        const double w = static_cast<double>(m) * kPi / t_f_;
        const double c = coefficients_[2 * m];
        const double d = coefficients_[2 * m + 1];
        if (m == 0) {
          if (order == 0) acc += c;
          continue;
        }
        acc += c * cos_derivative(w, t, order) + d * sin_derivative(w, t, order);
      }
      return acc;
    }
    case ModulationKind::ConstantBaseline:
      return order == 0 ? coefficients_[0] : 0.0;
    case ModulationKind::BangBang: {
      if (order > 0) return 0.0;
      const auto switches = std::count_if(coefficients_.begin() + 1, coefficients_.end(),
                                          [t](double s) { return s <= t; });
      return switches % 2 == 0 ? coefficients_[0] : 0.0;
    }
    case ModulationKind::Sampled:
      return sampled_derivative(t, order);
  }
  return 0.0;
}

namespace {

// Node derivatives of uniformly sampled data: second-order centered stencils,
// second-order one-sided stencils at the ends.
double node_derivative(const std::vector<double>& y, double h, int i, int order) {
  const int n = static_cast<int>(y.size());
  if (order == 0) return y[i];
  auto d = [&](int j) { return node_derivative(y, h, j, order - 1); };
  if (order == 2 && n >= 4) {
    if (i == 0) return (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / (h * h);
    if (i == n - 1) return (2.0 * y[n - 1] - 5.0 * y[n - 2] + 4.0 * y[n - 3] - y[n - 4]) / (h * h);
    return (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
  }
  if (n < 3) return (d(n - 1) - d(0)) / h;
  if (i == 0) return (-3.0 * d(0) + 4.0 * d(1) - d(2)) / (2.0 * h);
  if (i == n - 1) return (3.0 * d(n - 1) - 4.0 * d(n - 2) + d(n - 3)) / (2.0 * h);
  return (d(i + 1) - d(i - 1)) / (2.0 * h);
}

}  // namespace

double Modulation::sampled_derivative(double t, int order) const {
  const int n = static_cast<int>(samples_.size());
  const double h = t_f_ / (n - 1);
  const double pos = t / h;
  int i = std::min(static_cast<int>(std::floor(pos)), n - 2);
  const double w = pos - i;
  const double left = node_derivative(samples_, h, i, order);
  const double right = node_derivative(samples_, h, i + 1, order);
  return (1.0 - w) * left + w * right;
}

std::vector<double> Modulation::sample(std::span<const double> times, int order) const {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(derivative(t, order));
  return out;
}

Modulation Modulation::to_fourier() const {
  switch (kind_) {
    case ModulationKind::FourierSeries:
      return *this;
    case ModulationKind::ConstantBaseline:
      return fourier_series({coefficients_[0], 0.0}, t_f_);
    case ModulationKind::Trigonometric: {
      // sin x cos^5 x = (5 sin 2x + 4 sin 4x + sin 6x) / 32 with 2x = pi t / t_f.
      const double a = coefficients_[0] / 32.0;
      return fourier_series({0.0, 0.0, 0.0, 5.0 * a, 0.0, 4.0 * a, 0.0, a}, t_f_);
    }
    default:
      throw InputError("modulation kind " + std::string(to_string(kind_)) +
                       " has no exact Fourier representation");
  }
}

nlohmann::json Modulation::to_json() const {
  nlohmann::json j;
  j["kind"] = std::string(to_string(kind_));
  j["coefficients"] = coefficients_;
  j["t_f"] = t_f_;
  if (kind_ == ModulationKind::Sampled) j["samples"] = samples_;
  return j;
}

Modulation Modulation::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("modulation JSON must be an object");
  const auto kind = modulation_kind_from_string(j.at("kind").get<std::string>());
  const double t_f = j.at("t_f").get<double>();
  auto coeffs = j.value("coefficients", std::vector<double>{});
  switch (kind) {
    case ModulationKind::Sampled:
      return sampled(j.at("samples").get<std::vector<double>>(), t_f);
    case ModulationKind::Polynomial:
      return polynomial(std::move(coeffs), t_f);
    case ModulationKind::FourierSeries:
      return fourier_series(std::move(coeffs), t_f);
    case ModulationKind::Trigonometric:
    case ModulationKind::ConstantBaseline:
      if (coeffs.size() != 1) throw InputError("modulation kind needs exactly one coefficient");
      return kind == ModulationKind::Trigonometric ? trigonometric(coeffs[0], t_f)
                                                    : constant(coeffs[0], t_f);
    case ModulationKind::BangBang: {
      if (coeffs.empty()) throw InputError("bang-bang modulation needs u_max");
      return bang_bang(coeffs[0], std::vector<double>(coeffs.begin() + 1, coeffs.end()), t_f);
    }
  }
  throw InputError("unhandled modulation kind");
}

double eval_poly_gc(const SystemParams& p, double t) {
  if (!(t >= 0.0 && t <= p.t_f)) throw DomainError("time outside [0, t_f]");
  const double tf7 = std::pow(p.t_f, 7);
  return -70.0 * kPi * p.g_z0 * t * t * t * std::pow(t - p.t_f, 3) / (p.kappa * tf7);
}

double eval_trig_gc(const SystemParams& p, double t) {
  if (!(t >= 0.0 && t <= p.t_f)) throw DomainError("time outside [0, t_f]");
  const double x = kPi * t / (2.0 * p.t_f);
  return 3.0 * p.g_z0 * kPi * kPi / (2.0 * p.kappa * p.t_f) * std::sin(x) * std::pow(std::cos(x), 5);
}

double baseline_modulation(const SystemParams& p, double t) {
  if (!(t >= 0.0 && t <= p.t_f)) throw DomainError("time outside [0, t_f]");
  return p.g_z0;
}

Modulation poly_modulation(const SystemParams& p) {
  // -70 pi g_z0 / (kappa t_f) * s^3 (s - 1)^3 = B (s^6 - 3 s^5 + 3 s^4 - s^3) with B < 0.
  const double b = -70.0 * kPi * p.g_z0 / (p.kappa * p.t_f);
  return Modulation::polynomial({0.0, 0.0, 0.0, -b, 3.0 * b, -3.0 * b, b}, p.t_f);
}

Modulation trig_modulation(const SystemParams& p) {
  return Modulation::trigonometric(3.0 * p.g_z0 * kPi * kPi / (2.0 * p.kappa * p.t_f), p.t_f);
}

Modulation baseline(const SystemParams& p) { return Modulation::constant(p.g_z0, p.t_f); }

Modulation gz_from_gc(const Modulation& gc, double omega_r) {
  if (!(omega_r > 0.0)) throw InputError("omega_r must be positive");
  const double w2 = omega_r * omega_r;
  const double tf = gc.t_f();
  switch (gc.kind()) {
    case ModulationKind::Polynomial: {
      const auto b = gc.coefficients();
      std::vector<double> out(b.begin(), b.end());
      for (std::size_t k = 0; k + 2 < b.size(); ++k) {
        out[k] += static_cast<double>((k + 2) * (k + 1)) * b[k + 2] / (w2 * tf * tf);
      }
      return Modulation::polynomial(std::move(out), tf);
    }
    case ModulationKind::Trigonometric:
    case ModulationKind::FourierSeries: {
      const auto fs = gc.to_fourier();
      std::vector<double> out(fs.coefficients().begin(), fs.coefficients().end());
      for (std::size_t m = 0; 2 * m < out.size(); ++m) {
        const double w = static_cast<double>(m) * kPi / tf;
        const double scale = 1.0 - w * w / w2;
        out[2 * m] *= scale;
        out[2 * m + 1] *= scale;
      }
      return Modulation::fourier_series(std::move(out), tf);
    }
    case ModulationKind::ConstantBaseline:
    case ModulationKind::BangBang:
      return gc;
    case ModulationKind::Sampled: {
      const auto& y = gc.samples();
      if (y.size() < 5) throw ResolutionError("sampled g_c needs at least 5 points");
      const double h = tf / static_cast<double>(y.size() - 1);
      std::vector<double> out(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) {
        out[i] = y[i] + node_derivative(y, h, static_cast<int>(i), 2) / w2;
      }
      return Modulation::sampled(std::move(out), tf);
    }
  }
  throw InputError("unhandled modulation kind");
}

nlohmann::json BoundaryReport::to_json() const {
  return {{"residuals",
           {{"g_c(0)", residuals[0]},
            {"g_c(t_f)", residuals[1]},
            {"dg_c(0)", residuals[2]},
            {"dg_c(t_f)", residuals[3]},
            {"d2g_c(0)", residuals[4]},
            {"d2g_c(t_f)", residuals[5]}}},
          {"displacement_integral", displacement_integral},
          {"tolerance", tolerance},
          {"passed", passed}};
}

BoundaryReport verify_boundaries(const Modulation& m, const SystemParams& p, double tol) {
  p.validate();
  BoundaryReport r;
  r.tolerance = tol;
  const double tf = m.t_f();
  const double scale = p.g_z0 > 0.0 ? p.g_z0 : 1.0;
  for (int order = 0; order <= 2; ++order) {
    const double norm = std::pow(tf, order) / scale;
    r.residuals[2 * order] = std::abs(m.derivative(0.0, order)) * norm;
    r.residuals[2 * order + 1] = std::abs(m.derivative(tf, order)) * norm;
  }
  const double target = scale * kPi / (2.0 * p.kappa);
  const double integral = quad::adaptive_simpson([&](double t) { return m.value(t); }, 0.0, tf,
                                                 1e-13 * target, 16);
  r.displacement_integral = integral / target;
  r.passed = std::all_of(r.residuals.begin(), r.residuals.end(), [tol](double v) { return v < tol; }) &&
             std::abs(r.displacement_integral - 1.0) < tol;
  return r;
}

std::vector<double> uniform_grid(double t_end, int points) {
  if (points < 2) throw ResolutionError("grid needs at least 2 points");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = t_end * static_cast<double>(i) / (points - 1);
  g.back() = t_end;
  return g;
}

Modulation resample(const Modulation& m, int points) {
  const auto grid = uniform_grid(m.t_f(), points);
  return Modulation::sampled(m.sample(grid), m.t_f());
}

std::string modulation_csv(const Modulation& m, std::span<const double> times) {
  io::CsvWriter csv({"t_seconds", "value_rad_per_s"});
  for (double t : times) csv.row({t, m.value(t)});
  return csv.str();
}

}  // namespace longi
