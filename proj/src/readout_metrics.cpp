#include "longi/readout_metrics.hpp"

#include <cmath>

#include "longi/errors.hpp"
#include "longi/io.hpp"

namespace longi {

namespace {

// Running trapezoid integral of the branch-difference quadrature,
// 2 kappa Re((alpha_e - alpha_g) e^{-i phi}), evaluated at increasing taus.
class SignalIntegrator {
 public:
  SignalIntegrator(const CavityTrajectory& traj, double phi) : traj_(traj) {
    if (traj.alpha_e.size() != traj.size() || traj.alpha_g.size() != traj.size()) {
      throw DimensionError("trajectory branches do not match the time grid");
    }
    if (traj.size() == 0) throw InputError("empty trajectory");
    rotation_ = std::polar(1.0, -phi);
    // alpha(0) = 0 closes the gap when the grid starts after t = 0.
    prev_t_ = 0.0;
    prev_f_ = 0.0;
    if (traj.times[0] < 0.0) throw DomainError("trajectory starts before t = 0");
  }

  double integral_to(double tau) {
    if (tau < last_tau_) throw InputError("tau values must be increasing");
    last_tau_ = tau;
    const double t_end = traj_.times.back();
    if (tau > t_end * (1.0 + 1e-12)) {
      throw DomainError("tau " + io::number(tau) + " beyond trajectory end " + io::number(t_end));
    }
    while (next_ < traj_.size() && traj_.times[next_] <= tau) {
      const double t = traj_.times[next_];
      const double f = value(next_);
      total_ += 0.5 * (t - prev_t_) * (f + prev_f_);
      prev_t_ = t;
      prev_f_ = f;
      ++next_;
    }
    if (tau <= prev_t_ || next_ >= traj_.size()) return total_;
    const double t1 = traj_.times[next_];
    const double f1 = value(next_);
    const double w = (tau - prev_t_) / (t1 - prev_t_);
    const double f_tau = prev_f_ + w * (f1 - prev_f_);
    return total_ + 0.5 * (tau - prev_t_) * (prev_f_ + f_tau);
  }

 private:
  double value(std::size_t i) const {
    return 2.0 * traj_.kappa * ((traj_.alpha_e[i] - traj_.alpha_g[i]) * rotation_).real();
  }

  const CavityTrajectory& traj_;
  Complex rotation_;
  std::size_t next_ = 0;
  double prev_t_ = 0.0;
  double prev_f_ = 0.0;
  double total_ = 0.0;
  double last_tau_ = 0.0;
};

}  // namespace

void SqueezeSpec::validate() const {
  if (!(r >= 0.0)) throw InputError("squeezing parameter r must be non-negative");
}

SqueezeSpec SqueezeSpec::from_db(double db, double theta, double phi) {
  // 10 log10(e^{2r}) = db  =>  r = db ln(10) / 20.
  return SqueezeSpec{db * std::log(10.0) / 20.0, theta, phi};
}

double homodyne_signal(const CavityTrajectory& traj, double phi, double tau) {
  if (tau < 0.0) throw DomainError("tau must be non-negative");
  SignalIntegrator integrator(traj, phi);
  return std::abs(integrator.integral_to(tau));
}

double noise_power(double kappa, double tau, const std::optional<SqueezeSpec>& sq) {
  if (tau < 0.0) throw DomainError("tau must be non-negative");
  const double vacuum = kappa * tau;
  if (!sq) return vacuum;
  sq->validate();
  return vacuum * (std::cosh(2.0 * sq->r) + std::sinh(2.0 * sq->r) * std::cos(2.0 * (sq->phi - sq->theta)));
}

SNRCurve snr_curve(const CavityTrajectory& traj, double phi, std::span<const double> taus,
                   const std::optional<SqueezeSpec>& sq) {
  SNRCurve curve;
  curve.squeeze = sq;
  curve.kappa = traj.kappa;
  curve.phi = sq ? sq->phi : phi;
  SignalIntegrator integrator(traj, curve.phi);
  for (double tau : taus) {
    if (tau < 0.0) throw DomainError("tau must be non-negative");
    const double signal = std::abs(integrator.integral_to(tau));
    const double noise = noise_power(traj.kappa, tau, sq);
    curve.taus.push_back(tau);
    curve.signal.push_back(signal);
    curve.noise_var.push_back(noise);
    curve.snr.push_back(noise > 0.0 ? signal / std::sqrt(2.0 * noise) : 0.0);
  }
  return curve;
}

double fit_scaling_exponent(const SNRCurve& curve, std::pair<double, double> window) {
  const auto [lo, hi] = window;
  if (!(hi > lo)) throw FitError("fit window must have tau_hi > tau_lo");
  const double kappa = curve.kappa > 0.0 ? curve.kappa : 1.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < curve.taus.size(); ++i) {
    const double tau = curve.taus[i];
    if (tau < lo || tau > hi) continue;
    if (!(curve.snr[i] > 0.0)) {
      throw FitError("non-positive SNR at tau = " + io::number(tau) + " inside the fit window");
    }
    const double x = std::log(kappa * tau);
    const double y = std::log(curve.snr[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 10) throw FitError("fit window holds " + std::to_string(n) + " points, need at least 10");
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw FitError("degenerate fit window");
  return (n * sxy - sx * sy) / denom;
}

std::string snr_csv(const SNRCurve& curve) {
  io::CsvWriter csv({"tau", "signal", "noise_var", "snr"});
  for (std::size_t i = 0; i < curve.taus.size(); ++i) {
    csv.row({curve.taus[i], curve.signal[i], curve.noise_var[i], curve.snr[i]});
  }
  return csv.str();
}

}  // namespace longi
