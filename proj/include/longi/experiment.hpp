#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "longi/cd_floquet.hpp"
#include "longi/circuit_model.hpp"
#include "longi/genetic_opt.hpp"
#include "longi/lindblad_oracle.hpp"
#include "longi/readout_metrics.hpp"
#include "longi/time_optimal.hpp"

namespace longi {

enum class Scenario { DesignPoly, DesignTrig, Baseline, CDFrame, Floquet, GA, Oracle, Circuit, OCT };

std::string_view to_string(Scenario s);
/// Throws ConfigError("/scenario") for unknown names.
Scenario scenario_from_string(std::string_view name);

enum class Ansatz { Polynomial, Trigonometric };

std::string_view to_string(Ansatz a);

/// Bang-bang scenario block.
struct ControlSpec {
  /// 0 selects the quoted circuit coupling bound.
  double u_max = 0.0;
  int k_max = 1000;
  int arc_points = 401;
};

inline constexpr int kSchemaVersion = 1;

/// One experiment. JSON layout:
///
///   {"schema_version": 1, "scenario": "DesignTrig", "system": {...},
///    "output_dir": "out", "seed": 1, "grid_points": 1001, ...,
///    <at most one of "squeeze", "floquet", "ga", "circuit", "evolution", "control">}
///
/// Unknown keys are rejected. Each scenario accepts only its own block:
/// squeeze for the design and baseline runs, floquet/ga/circuit/evolution/control
/// for Floquet/GA/Circuit/Oracle/OCT. The Floquet, GA and Circuit blocks are
/// required; the others fall back to defaults when absent.
struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  Scenario scenario = Scenario::DesignTrig;
  SystemParams system = SystemParams::reference_point();
  /// Waveform for CDFrame, Floquet and Oracle.
  Ansatz ansatz = Ansatz::Trigonometric;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
  int grid_points = 1001;
  int tau_points = 200;
  double homodyne_angle = kDefaultHomodyneAngle;
  /// Exponent fit window in units of t_f.
  std::pair<double, double> fit_window{0.01, 0.1};
  /// Overrides the truncation of whichever simulation the scenario runs.
  std::optional<int> fock_truncation;

  std::optional<SqueezeSpec> squeeze;
  std::optional<FloquetSpec> floquet;
  std::optional<GAConfig> ga;
  std::optional<CircuitParams> circuit;
  std::optional<EvolutionConfig> evolution;
  std::optional<ControlSpec> control;

  /// Throws ConfigError with a JSON pointer to the offending field.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::filesystem::path& path);

  /// Canonical echo: every field with its resolved value.
  nlohmann::json to_json() const;
  /// First 12 hex digits of the SHA-256 of the canonical echo.
  std::string digest() const;
  /// output_dir / "<scenario>-<digest>".
  std::filesystem::path run_directory() const;
};

struct ManifestEntry {
  std::string name;
  std::string sha256;
  std::size_t bytes = 0;
};

struct RunResult {
  std::filesystem::path directory;
  std::vector<ManifestEntry> files;
  nlohmann::json summary;
  /// Cavity trajectory and SNR curve for scenarios that produce one.
  std::optional<CavityTrajectory> trajectory;
  std::optional<SNRCurve> snr;
};

/// Runs the scenario and writes its artifacts plus manifest.json. Output is
/// a pure function of the config.
RunResult run_experiment(const ExperimentConfig& cfg);

struct ComparisonResult {
  std::filesystem::path directory;
  std::vector<ManifestEntry> files;
  nlohmann::json summary;
  std::string separation_csv;
  std::string snr_csv;
};

/// Runs every config (concurrently) and tabulates separation d(t) and SNR(tau)
/// side by side, with ratios at t_f against the first config. Throws
/// AlignmentError unless all runs share the same t and tau grids.
ComparisonResult compare_experiments(const std::vector<ExperimentConfig>& configs,
                                     const std::filesystem::path& output_dir);

/// {"error": {"kind", "message", "field"?, "suggested_truncation"?}}
nlohmann::json error_json(const std::exception& e);

}  // namespace longi
