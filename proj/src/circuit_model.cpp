#include "longi/circuit_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "longi/errors.hpp"
#include "longi/io.hpp"

namespace longi {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

// Design targets quoted for the circuit at the reference operating point.
constexpr double kQuotedOmegaQ = kTwoPi * 3.28e9;
constexpr double kQuotedGz = kTwoPi * 2.57e9;
constexpr double kQuotedRatio = 0.5793;
}  // namespace

void CircuitParams::validate() const {
  if (!(E_C > 0.0)) throw InputError("E_C must be positive");
  if (!(d_asym >= 0.0 && d_asym < 1.0)) throw InputError("d_asym must lie in [0, 1)");
  if (n_cut < 10) throw InputError("n_cut must be at least 10");
  if (E_J < 0.0 || E_Sigma < 0.0) throw InputError("Josephson energies must be non-negative");
}

CircuitParams CircuitParams::reference_point() {
  CircuitParams cp;
  cp.E_J = kTwoPi * 20e9;
  cp.E_C = cp.E_J / 67.0;
  cp.E_Sigma = 1.5 * cp.E_J;
  cp.d_asym = 0.02;
  cp.n_g = 0.5;
  cp.phi_x = kPi / 4.0;
  cp.varphi_x = kPi / 4.0;
  cp.omega_r = kTwoPi * 6.6e9;
  cp.L_r = 200e3 / cp.omega_r;
  cp.n_cut = 20;
  return cp;
}

double CircuitParams::E_Jtilde() const { return E_J + squid_energy(E_Sigma, d_asym, varphi_x); }

nlohmann::json CircuitParams::to_json() const {
  return {{"E_J", E_J},         {"E_C", E_C},     {"E_Sigma", E_Sigma}, {"d_asym", d_asym},
          {"n_g", n_g},         {"phi_x", phi_x}, {"varphi_x", varphi_x}, {"L_r", L_r},
          {"omega_r", omega_r}, {"n_cut", n_cut}};
}

CircuitParams CircuitParams::from_json(const nlohmann::json& j) {
  CircuitParams cp = reference_point();
  cp.E_J = j.value("E_J", cp.E_J);
  cp.E_C = j.value("E_C", cp.E_C);
  cp.E_Sigma = j.value("E_Sigma", cp.E_Sigma);
  cp.d_asym = j.value("d_asym", cp.d_asym);
  cp.n_g = j.value("n_g", cp.n_g);
  cp.phi_x = j.value("phi_x", cp.phi_x);
  cp.varphi_x = j.value("varphi_x", cp.varphi_x);
  cp.L_r = j.value("L_r", cp.L_r);
  cp.omega_r = j.value("omega_r", cp.omega_r);
  cp.n_cut = j.value("n_cut", cp.n_cut);
  cp.validate();
  return cp;
}

double squid_energy(double E_Sigma, double d_asym, double varphi_x) {
  const double c = std::cos(varphi_x), s = std::sin(varphi_x);
  return E_Sigma * std::sqrt(c * c + d_asym * d_asym * s * s);
}

Eigen::MatrixXd cos_theta_matrix(int n_cut) {
  const int dim = 2 * n_cut + 1;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i + 1 < dim; ++i) {
    c(i, i + 1) = 0.5;
    c(i + 1, i) = 0.5;
  }
  return c;
}

Eigen::MatrixXd transmon_matrix(const CircuitParams& cp) {
  cp.validate();
  const int dim = 2 * cp.n_cut + 1;
  Eigen::MatrixXd h = -cp.E_Jtilde() * cos_theta_matrix(cp.n_cut);
  for (int i = 0; i < dim; ++i) {
    const double n = i - cp.n_cut - cp.n_g;
    h(i, i) = cp.E_C * n * n;
  }
  return h;
}

TransmonSpectrum diagonalize(const CircuitParams& cp) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(transmon_matrix(cp));
  if (es.info() != Eigen::Success) throw DomainError("transmon diagonalization failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

PauliProjection pauli_projection(const CircuitParams& cp) {
  const auto spec = diagonalize(cp);
  const Eigen::MatrixXd c = cos_theta_matrix(cp.n_cut);
  const Eigen::VectorXd g = spec.vectors.col(0);
  const Eigen::VectorXd e = spec.vectors.col(1);
  const double m_ee = e.dot(c * e);
  const double m_gg = g.dot(c * g);
  const double m_eg = e.dot(c * g);
  PauliProjection out;
  // Real symmetric M in the {|e>, |g>} basis: sigma^y drops out.
  out.alpha_x = m_eg;
  out.alpha_y = 0.0;
  out.alpha_z = 0.5 * (m_ee - m_gg);
  out.alpha_I = 0.5 * (m_ee + m_gg);
  const double split = spec.energies(1) - spec.energies(0);
  if (spec.energies.size() > 2) {
    const double gap = spec.energies(2) - spec.energies(1);
    if (gap < 0.1 * split) {
      out.warnings.push_back("level 2 lies within 10% of the qubit splitting above level 1; the two-level "
                             "projection mixes with higher states");
    }
  }
  if (split < 1e-9 * std::max(cp.E_C, cp.E_Jtilde())) {
    out.warnings.push_back("qubit levels are degenerate; the eigenbasis and alpha_k are ill-defined");
  }
  if (std::abs(out.alpha_x) > 1e-6) {
    out.warnings.push_back("cos(theta) keeps a transverse part alpha_x = " + io::number(out.alpha_x));
  }
  return out;
}

double gz_estimate(double omega_q, double omega_r, double L_r) {
  if (omega_q < 0.0 || !(omega_r > 0.0) || !(L_r > 0.0)) {
    throw InputError("gz_estimate needs omega_q >= 0 and positive omega_r, L_r");
  }
  return omega_q / (2.0 * constants::phi0) * std::sqrt(constants::hbar * omega_r * L_r / 2.0);
}

DerivedFrequencies derived_frequencies(const CircuitParams& cp) {
  DerivedFrequencies out;
  out.omega_q_quoted = std::sqrt(cp.E_C * cp.E_C + cp.d_asym * cp.E_Sigma * cp.E_Sigma);
  const auto spec = diagonalize(cp);
  out.omega_q_exact = spec.energies(1) - spec.energies(0);
  out.E_Jtilde = cp.E_Jtilde();
  out.discrepancy = out.omega_q_exact - out.omega_q_quoted;
  return out;
}

nlohmann::json circuit_report(const CircuitParams& cp) {
  const auto freq = derived_frequencies(cp);
  const auto proj = pauli_projection(cp);
  const double gz_quoted_wq = gz_estimate(kQuotedOmegaQ, cp.omega_r, cp.L_r);
  const double gz_formula_wq = gz_estimate(freq.omega_q_quoted, cp.omega_r, cp.L_r);
  const double gz_exact_wq = gz_estimate(freq.omega_q_exact, cp.omega_r, cp.L_r);
  auto rel = [](double value, double target) { return (value - target) / target; };
  return {
      {"inputs", cp.to_json()},
      {"omega_q",
       {{"quoted_expression", freq.omega_q_quoted},
        {"exact_splitting", freq.omega_q_exact},
        {"target", kQuotedOmegaQ},
        {"deviation_quoted_expression", rel(freq.omega_q_quoted, kQuotedOmegaQ)},
        {"deviation_exact_splitting", rel(freq.omega_q_exact, kQuotedOmegaQ)},
        {"E_Jtilde", freq.E_Jtilde}}},
      {"g_z",
       {{"at_target_omega_q", gz_quoted_wq},
        {"at_quoted_expression", gz_formula_wq},
        {"at_exact_splitting", gz_exact_wq},
        {"target", kQuotedGz},
        {"deviation", rel(gz_quoted_wq, kQuotedGz)}}},
      {"ratio",
       {{"formula", gz_quoted_wq / cp.omega_r},
        {"target", kQuotedRatio},
        {"target_gz_over_omega_r", kQuotedGz / cp.omega_r},
        {"deviation", rel(gz_quoted_wq / cp.omega_r, kQuotedRatio)}}},
      {"pauli",
       {{"alpha_x", proj.alpha_x},
        {"alpha_y", proj.alpha_y},
        {"alpha_z", proj.alpha_z},
        {"alpha_I", proj.alpha_I},
        {"warnings", proj.warnings}}},
  };
}

SpectrumSweep spectrum_sweep(const CircuitParams& base, std::span<const double> varphi_grid, int levels) {
  if (levels < 2) throw InputError("spectrum sweep needs at least two levels");
  SpectrumSweep sweep;
  for (double x : varphi_grid) {
    CircuitParams cp = base;
    cp.varphi_x = x;
    const auto spec = diagonalize(cp);
    const int k = std::min<int>(levels, static_cast<int>(spec.energies.size()));
    sweep.varphi.push_back(x);
    sweep.levels.emplace_back(spec.energies.data(), spec.energies.data() + k);
    sweep.projections.push_back(pauli_projection(cp));
  }
  return sweep;
}

std::string SpectrumSweep::csv() const {
  std::vector<std::string> header{"varphi_x"};
  const std::size_t k = levels.empty() ? 0 : levels.front().size();
  for (std::size_t i = 0; i < k; ++i) header.push_back("E" + std::to_string(i));
  for (const char* a : {"alpha_x", "alpha_y", "alpha_z", "alpha_I"}) header.emplace_back(a);
  io::CsvWriter out(header);
  for (std::size_t i = 0; i < varphi.size(); ++i) {
    std::vector<double> row{varphi[i]};
    row.insert(row.end(), levels[i].begin(), levels[i].end());
    const auto& p = projections[i];
    row.insert(row.end(), {p.alpha_x, p.alpha_y, p.alpha_z, p.alpha_I});
    out.row(row);
  }
  return out.str();
}

double flatness_ratio(const CircuitParams& base, const SpectrumSweep& sweep) {
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < sweep.varphi.size(); ++i) {
    const double de_js = std::abs(squid_energy(base.E_Sigma, base.d_asym, sweep.varphi[i + 1]) -
                                  squid_energy(base.E_Sigma, base.d_asym, sweep.varphi[i]));
    if (de_js <= 1e-12 * std::max(base.E_Sigma, 1.0)) continue;
    for (std::size_t k = 0; k < sweep.levels[i].size(); ++k) {
      worst = std::max(worst, std::abs(sweep.levels[i + 1][k] - sweep.levels[i][k]) / de_js);
    }
  }
  return worst;
}

}  // namespace longi
