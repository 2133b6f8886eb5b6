#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "longi/pulse_design.hpp"
#include "longi/readout_metrics.hpp"

namespace longi {

/// Genetic search over Fourier-series modulations on [0, horizon].
///
/// Individuals are coordinates in the null space of the (linear) boundary and
/// displacement constraints, measured in units of the mean amplitude
/// g_z0 pi / (2 kappa horizon). Every decoded individual therefore meets the
/// constraints up to rounding; the penalty in fitness() still applies.
struct GAConfig {
  int n_coeffs = 8;
  int population = 40;
  int generations = 60;
  double mutation_rate = 0.2;
  double crossover_rate = 0.9;
  std::uint64_t seed = 1;
  /// Objective horizon; 0 means t_f / 2.
  double horizon = 0.0;
  /// 0 means 1e3 times the incumbent SNR.
  double penalty_weight = 0.0;
  /// Gaussian mutation width and search box half-width, in mean-amplitude units.
  double mutation_sigma = 0.1;
  double coordinate_bound = 4.0;
  int tournament = 3;
  int elitism = 2;
  int grid_points = 513;
  bool seed_incumbent = true;

  void validate() const;
  double resolved_horizon(const SystemParams& p) const { return horizon > 0.0 ? horizon : 0.5 * p.t_f; }

  nlohmann::json to_json() const;
  static GAConfig from_json(const nlohmann::json& j);
};

struct GenerationStats {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
  double feasible_fraction = 0.0;
};

struct OptimizedModulation {
  std::vector<double> coefficients;
  double horizon = 0.0;
  std::vector<double> fitness_history;
  std::vector<GenerationStats> generations;
  double final_snr = 0.0;
  double fitness = 0.0;
  double incumbent_snr = 0.0;
  BoundaryReport constraint_residuals;

  Modulation modulation() const { return Modulation::fourier_series(coefficients, horizon); }
  nlohmann::json to_json() const;
  /// generation,best,mean,feasible_fraction
  std::string history_csv() const;
};

/// sum_m c_m cos(m pi t / t_f) + d_m sin(m pi t / t_f) for coeffs {c_0, d_0, c_1, d_1, ...},
/// or its order-th derivative.
double decode_coeffs(std::span<const double> coeffs, double t_f, double t, int order = 0);

/// Vacuum-noise SNR at tau of the trajectory driven by gc on a uniform grid
/// of `grid_points` samples over [0, gc.t_f()].
double snr_at(const Modulation& gc, double kappa, double tau, int grid_points,
              double phi = kDefaultHomodyneAngle);

/// SNR at the horizon of the trigonometric design for the full duration t_f,
/// the incumbent every run has to beat.
double incumbent_snr(const SystemParams& p, const GAConfig& cfg);

/// Sum of squared normalized boundary residuals plus (integral - 1)^2.
double constraint_violation(std::span<const double> coeffs, const SystemParams& p, const GAConfig& cfg);

/// SNR(horizon) minus penalty_weight times constraint_violation.
double fitness(std::span<const double> coeffs, const SystemParams& p, const GAConfig& cfg);

/// Deterministic for a fixed seed and independent of the worker count.
/// Throws InfeasibleError when no individual meets the constraints.
OptimizedModulation ga_run(const SystemParams& p, const GAConfig& cfg);

}  // namespace longi
