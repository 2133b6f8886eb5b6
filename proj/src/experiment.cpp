#include "longi/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>

#include "longi/errors.hpp"
#include "longi/io.hpp"
#include "longi/parallel.hpp"

namespace longi {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<std::pair<Scenario, std::string_view>, 9> kScenarioNames{{
    {Scenario::DesignPoly, "DesignPoly"},
    {Scenario::DesignTrig, "DesignTrig"},
    {Scenario::Baseline, "Baseline"},
    {Scenario::CDFrame, "CDFrame"},
    {Scenario::Floquet, "Floquet"},
    {Scenario::GA, "GA"},
    {Scenario::Oracle, "Oracle"},
    {Scenario::Circuit, "Circuit"},
    {Scenario::OCT, "OCT"},
}};

constexpr std::array<std::string_view, 6> kBlocks{"squeeze", "floquet", "ga", "circuit", "evolution", "control"};

// Strict reader for one JSON object: unknown keys and wrong types become
// ConfigErrors pointing at the field.
class Block {
 public:
  Block(const json& j, std::string pointer, std::initializer_list<std::string_view> allowed)
      : j_(j), pointer_(std::move(pointer)) {
    if (!j.is_object()) throw ConfigError(where(), "expected an object");
    for (const auto& [key, value] : j.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ConfigError(pointer_ + "/" + key, "unknown field '" + key + "'");
      }
    }
  }

  bool has(std::string_view key) const { return j_.contains(key); }
  std::string field(std::string_view key) const { return pointer_ + "/" + std::string(key); }

  double number(std::string_view key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(std::string(key));
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(field(key), "must be finite");
    return x;
  }

  int integer(std::string_view key, int fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(std::string(key));
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    const auto x = v.get<long long>();
    if (x < -1'000'000'000LL || x > 1'000'000'000LL) throw ConfigError(field(key), "integer out of range");
    return static_cast<int>(x);
  }

  std::uint64_t unsigned_integer(std::string_view key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(std::string(key));
    if (!v.is_number_unsigned()) throw ConfigError(field(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(std::string(key));
    if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(std::string_view key, std::string fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(std::string(key));
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }

  const json& raw(std::string_view key) const { return j_.at(std::string(key)); }
  std::string where() const { return pointer_.empty() ? "/" : pointer_; }

 private:
  const json& j_;
  std::string pointer_;
};

// Runs a module-level validation and reports its failure against `pointer`.
template <typename F>
void checked(const std::string& pointer, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(pointer, e.what());
  }
}

SystemParams parse_system(const json& j) {
  Block b(j, "/system", {"omega_q", "omega_r", "kappa", "g_z0", "t_f"});
  SystemParams p = SystemParams::reference_point();
  p.omega_q = b.number("omega_q", p.omega_q);
  p.omega_r = b.number("omega_r", p.omega_r);
  p.kappa = b.number("kappa", p.kappa);
  p.g_z0 = b.number("g_z0", p.g_z0);
  p.t_f = b.number("t_f", p.t_f);
  checked("/system", [&] { p.validate(); });
  return p;
}

SqueezeSpec parse_squeeze(const json& j) {
  Block b(j, "/squeeze", {"r", "db", "theta", "phi"});
  if (b.has("r") == b.has("db")) throw ConfigError("/squeeze", "give exactly one of 'r' and 'db'");
  const double phi = b.number("phi", kDefaultHomodyneAngle);
  const double theta = b.number("theta", phi - 0.5 * kPi);
  SqueezeSpec s = b.has("r") ? SqueezeSpec{b.number("r", 0.0), theta, phi}
                             : SqueezeSpec::from_db(b.number("db", 0.0), theta, phi);
  checked("/squeeze", [&] { s.validate(); });
  return s;
}

FloquetSpec parse_floquet(const json& j, const SystemParams& p) {
  Block b(j, "/floquet", {"Omega", "nu", "nu_cycles"});
  if (b.has("nu") == b.has("nu_cycles")) {
    throw ConfigError("/floquet", "give exactly one of 'nu' (rad/s) and 'nu_cycles' (periods per t_f)");
  }
  FloquetSpec s;
  s.Omega = b.number("Omega", 1.0);
  s.nu = b.has("nu") ? b.number("nu", 0.0) : b.number("nu_cycles", 0.0) * 2.0 * kPi / p.t_f;
  checked("/floquet", [&] { s.validate(); });
  return s;
}

GAConfig parse_ga(const json& j) {
  Block b(j, "/ga",
          {"n_coeffs", "population", "generations", "mutation_rate", "crossover_rate", "horizon", "penalty_weight",
           "mutation_sigma", "coordinate_bound", "tournament", "elitism", "grid_points", "seed_incumbent"});
  GAConfig c;
  c.n_coeffs = b.integer("n_coeffs", c.n_coeffs);
  c.population = b.integer("population", c.population);
  c.generations = b.integer("generations", c.generations);
  c.mutation_rate = b.number("mutation_rate", c.mutation_rate);
  c.crossover_rate = b.number("crossover_rate", c.crossover_rate);
  c.horizon = b.number("horizon", c.horizon);
  c.penalty_weight = b.number("penalty_weight", c.penalty_weight);
  c.mutation_sigma = b.number("mutation_sigma", c.mutation_sigma);
  c.coordinate_bound = b.number("coordinate_bound", c.coordinate_bound);
  c.tournament = b.integer("tournament", c.tournament);
  c.elitism = b.integer("elitism", c.elitism);
  c.grid_points = b.integer("grid_points", c.grid_points);
  c.seed_incumbent = b.boolean("seed_incumbent", c.seed_incumbent);
  checked("/ga", [&] { c.validate(); });
  return c;
}

CircuitParams parse_circuit(const json& j) {
  Block b(j, "/circuit",
          {"E_J", "E_C", "E_Sigma", "d_asym", "n_g", "phi_x", "varphi_x", "L_r", "omega_r", "n_cut"});
  CircuitParams c = CircuitParams::reference_point();
  c.E_J = b.number("E_J", c.E_J);
  c.E_C = b.number("E_C", c.E_C);
  c.E_Sigma = b.number("E_Sigma", c.E_Sigma);
  c.d_asym = b.number("d_asym", c.d_asym);
  c.n_g = b.number("n_g", c.n_g);
  c.phi_x = b.number("phi_x", c.phi_x);
  c.varphi_x = b.number("varphi_x", c.varphi_x);
  c.L_r = b.number("L_r", c.L_r);
  c.omega_r = b.number("omega_r", c.omega_r);
  c.n_cut = b.integer("n_cut", c.n_cut);
  checked("/circuit", [&] {
    c.validate();
    if (!(c.L_r > 0.0) || !(c.omega_r > 0.0)) throw InputError("L_r and omega_r must be positive");
  });
  return c;
}

EvolutionConfig parse_evolution(const json& j) {
  Block b(j, "/evolution",
          {"dt", "method", "fock_truncation", "frame", "rtol", "atol", "support_threshold"});
  EvolutionConfig c;
  c.dt = b.number("dt", c.dt);
  c.fock_truncation = b.integer("fock_truncation", c.fock_truncation);
  c.rtol = b.number("rtol", c.rtol);
  c.atol = b.number("atol", c.atol);
  c.support_threshold = b.number("support_threshold", c.support_threshold);
  checked(b.field("method"), [&] {
    c.method = integrator_from_string(b.string("method", std::string(to_string(c.method))));
  });
  checked(b.field("frame"), [&] { c.frame = frame_from_string(b.string("frame", std::string(to_string(c.frame)))); });
  checked("/evolution", [&] { c.validate(); });
  return c;
}

ControlSpec parse_control(const json& j) {
  Block b(j, "/control", {"u_max", "k_max", "arc_points"});
  ControlSpec c;
  c.u_max = b.number("u_max", c.u_max);
  c.k_max = b.integer("k_max", c.k_max);
  c.arc_points = b.integer("arc_points", c.arc_points);
  if (c.u_max < 0.0) throw ConfigError("/control/u_max", "must be non-negative");
  if (c.k_max < 1) throw ConfigError("/control/k_max", "must be at least 1");
  if (c.arc_points < 3) throw ConfigError("/control/arc_points", "must be at least 3");
  return c;
}

// Block each scenario may carry, and whether it is mandatory.
std::pair<std::string_view, bool> scenario_block(Scenario s) {
  switch (s) {
    case Scenario::DesignPoly:
    case Scenario::DesignTrig:
    case Scenario::Baseline:
      return {"squeeze", false};
    case Scenario::Floquet:
      return {"floquet", true};
    case Scenario::GA:
      return {"ga", true};
    case Scenario::Circuit:
      return {"circuit", true};
    case Scenario::Oracle:
      return {"evolution", false};
    case Scenario::OCT:
      return {"control", false};
    case Scenario::CDFrame:
      return {"", false};
  }
  return {"", false};
}

bool uses_ansatz(Scenario s) {
  return s == Scenario::CDFrame || s == Scenario::Floquet || s == Scenario::Oracle;
}

Ansatz ansatz_from_string(std::string_view name) {
  if (name == "polynomial") return Ansatz::Polynomial;
  if (name == "trigonometric") return Ansatz::Trigonometric;
  throw ConfigError("/ansatz", "expected 'polynomial' or 'trigonometric', got '" + std::string(name) + "'");
}

json squeeze_json(const SqueezeSpec& s) { return {{"r", s.r}, {"theta", s.theta}, {"phi", s.phi}}; }

json evolution_json(const EvolutionConfig& c) {
  return {{"dt", c.dt},
          {"method", to_string(c.method)},
          {"fock_truncation", c.fock_truncation},
          {"frame", to_string(c.frame)},
          {"rtol", c.rtol},
          {"atol", c.atol},
          {"support_threshold", c.support_threshold}};
}

json system_json(const SystemParams& p) {
  return {{"omega_q", p.omega_q}, {"omega_r", p.omega_r}, {"kappa", p.kappa}, {"g_z0", p.g_z0}, {"t_f", p.t_f}};
}

// ---------------------------------------------------------------------------
// Scenario runners. Each fills `files` (name -> contents) and the summary.

struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;
  json summary = json::object();
  std::optional<CavityTrajectory> trajectory;
  std::optional<SNRCurve> snr;

  void add(std::string name, std::string contents) { files.emplace_back(std::move(name), std::move(contents)); }
  void add_json(std::string name, const json& j) { add(std::move(name), j.dump(2) + "\n"); }
};

Modulation ansatz_gc(const ExperimentConfig& cfg) {
  return cfg.ansatz == Ansatz::Polynomial ? poly_modulation(cfg.system) : trig_modulation(cfg.system);
}

std::vector<double> tau_grid(double horizon, int points) {
  std::vector<double> taus(points);
  for (int i = 0; i < points; ++i) taus[i] = horizon * (i + 1) / points;
  return taus;
}

std::string modulation_table(const Modulation& gc, const Modulation& gz, std::span<const double> grid) {
  io::CsvWriter csv({"t", "g_c", "g_z"});
  for (double t : grid) csv.row({t, gc.value(t), gz.value(t)});
  return csv.str();
}

// Trajectory, separation and SNR artifacts shared by the design-type runs.
void readout_artifacts(const ExperimentConfig& cfg, const Modulation& gc, Artifacts& out) {
  const double horizon = gc.t_f();
  const double kappa = cfg.system.kappa;
  const auto grid = uniform_grid(horizon, cfg.grid_points);
  auto traj = make_trajectory(gc, kappa, grid);
  const auto d = pointer_separation(traj);
  const auto taus = tau_grid(horizon, cfg.tau_points);
  auto curve = snr_curve(traj, cfg.homodyne_angle, taus, cfg.squeeze);

  out.add("trajectory.csv", trajectory_csv(traj));
  out.add("snr.csv", snr_csv(curve));
  out.summary["separation_tf"] = d.back();
  out.summary["snr_tf"] = curve.snr.back();
  out.summary["horizon"] = horizon;

  const std::pair<double, double> window{cfg.fit_window.first * horizon, cfg.fit_window.second * horizon};
  json fit{{"window", {window.first, window.second}}, {"reference_exponent", 2.25}};
  try {
    fit["exponent"] = fit_scaling_exponent(curve, window);
  } catch (const FitError& e) {
    fit["exponent"] = nullptr;
    fit["error"] = e.what();
  }
  out.summary["scaling_fit"] = fit;

  if (cfg.squeeze) {
    const auto vacuum = snr_curve(traj, curve.phi, taus);
    io::CsvWriter csv({"tau", "snr_vacuum", "snr_squeezed", "ratio"});
    double worst = 0.0;
    const double expected = std::exp(cfg.squeeze->r);
    for (std::size_t i = 0; i < taus.size(); ++i) {
      const double ratio = curve.snr[i] / vacuum.snr[i];
      worst = std::max(worst, std::abs(ratio - expected) / expected);
      csv.row({taus[i], vacuum.snr[i], curve.snr[i], ratio});
    }
    out.add("snr_squeezing.csv", csv.str());
    out.summary["squeezing"] = {{"expected_ratio", expected}, {"max_relative_deviation", worst}};
  }
  out.trajectory = std::move(traj);
  out.snr = std::move(curve);
}

void run_design(const ExperimentConfig& cfg, Artifacts& out) {
  const SystemParams& p = cfg.system;
  Modulation gc = cfg.scenario == Scenario::DesignPoly   ? poly_modulation(p)
                  : cfg.scenario == Scenario::DesignTrig ? trig_modulation(p)
                                                         : baseline(p);
  const Modulation gz = gz_from_gc(gc, p.omega_r);
  const auto grid = uniform_grid(p.t_f, cfg.grid_points);
  out.add("modulation.csv", modulation_table(gc, gz, grid));
  const auto report = verify_boundaries(gc, p);
  out.add_json("boundary.json", report.to_json());
  out.summary["boundary_passed"] = report.passed;
  out.summary["euler_lagrange_residual"] = euler_lagrange_residual(gc, gz, p.omega_r);
  if (p.kappa_implausible()) out.summary["warning"] = "kappa exceeds omega_r / 10";
  readout_artifacts(cfg, gc, out);
}

void run_cd_frame(const ExperimentConfig& cfg, Artifacts& out) {
  const SystemParams& p = cfg.system;
  const Modulation gc = ansatz_gc(cfg);
  const Modulation gz = gz_from_gc(gc, p.omega_r);
  const auto grid = uniform_grid(p.t_f, cfg.grid_points);
  FrameCheckConfig fc;
  fc.fock_truncation = cfg.fock_truncation.value_or(20);
  const auto check = frame_elimination_check(p, gc, gz, grid, fc);

  io::CsvWriter frame({"t", "fidelity", "infidelity", "theta"});
  io::CsvWriter drive({"t", "g_z", "cd_amplitude"});
  for (std::size_t i = 0; i < check.times.size(); ++i) {
    frame.row({check.times[i], check.fidelity[i], 1.0 - check.fidelity[i], check.theta[i]});
    drive.row({grid[i], gz.value(grid[i]), cd_amplitude(gz, p.omega_r, grid[i])});
  }
  out.add("frame_check.csv", frame.str());
  out.add("cd_drive.csv", drive.str());
  out.summary["ansatz"] = to_string(cfg.ansatz);
  out.summary["fock_truncation"] = fc.fock_truncation;
  out.summary["euler_lagrange_residual"] = euler_lagrange_residual(gc, gz, p.omega_r);
  out.summary["final_infidelity"] = 1.0 - check.fidelity.back();
  out.summary["max_infidelity"] =
      1.0 - *std::min_element(check.fidelity.begin(), check.fidelity.end());
}

double sigma_z_drift(const OracleResult& r) { return r.max_sigma_z_drift(); }

void run_floquet(const ExperimentConfig& cfg, Artifacts& out) {
  const SystemParams& p = cfg.system;
  const Modulation gz = gz_from_gc(ansatz_gc(cfg), p.omega_r);
  const FloquetDrive drive(gz, p.omega_r, *cfg.floquet);
  EvolutionConfig ec;
  ec.method = Integrator::RK45;
  ec.fock_truncation = cfg.fock_truncation.value_or(20);
  const auto grid = uniform_grid(p.t_f, cfg.grid_points);
  const auto rho0 = QubitCavityState::branch_mixture(0.5, ec.fock_truncation);

  const auto floquet = evolve_model(floquet_model(drive), p.kappa, rho0, ec, grid);
  const auto reference = evolve_model(cd_model(gz, p.omega_r, false), p.kappa, rho0, ec, grid);
  out.add("floquet_oracle.csv", oracle_csv(floquet));
  out.add("cd_reference.csv", oracle_csv(reference));

  io::CsvWriter amps({"t", "diag_amp", "coupling_amp"});
  for (double t : grid) {
    const auto a = drive.at(t);
    amps.row({t, a.diag_amp, a.coupling_amp});
  }
  out.add("drive.csv", amps.str());

  // The first-harmonic average at a quarter of the protocol, where g_z' != 0.
  const double t_probe = 0.25 * p.t_f;
  const double gz_dot = gz.derivative(t_probe, 1);
  const double c1 = gz_dot / (p.omega_r * drive.j1());
  const auto avg = magnus_average(c1, drive.spec(), gz_dot, p.omega_r);
  out.add_json("magnus.json", {{"t", t_probe},
                               {"C1", c1},
                               {"average", {avg.average.real(), avg.average.imag()}},
                               {"target", {avg.target.real(), avg.target.imag()}},
                               {"matches_cd", avg.matches_cd},
                               {"drive", drive.descriptor()}});

  const double d_f = pointer_separation(floquet.trajectory()).back();
  const double d_cd = pointer_separation(reference.trajectory()).back();
  out.summary["ansatz"] = to_string(cfg.ansatz);
  out.summary["nu"] = drive.spec().nu;
  out.summary["Omega"] = drive.spec().Omega;
  out.summary["separation_tf"] = d_f;
  out.summary["separation_tf_cd"] = d_cd;
  out.summary["relative_difference"] = (d_f - d_cd) / d_cd;
  out.summary["max_sigma_z_drift"] = std::max(sigma_z_drift(floquet), sigma_z_drift(reference));
  out.summary["max_trace_drift"] = std::max(floquet.max_trace_drift(), reference.max_trace_drift());
  out.summary["steps"] = floquet.steps;
  if (!drive.spec().slow_compared_with(p.omega_r)) out.summary["warning"] = "nu is not small compared with omega_r";
}

void run_ga(const ExperimentConfig& cfg, Artifacts& out) {
  GAConfig gc = *cfg.ga;
  gc.seed = cfg.seed;
  const auto result = ga_run(cfg.system, gc);
  out.add_json("optimized.json", result.to_json());
  out.add("history.csv", result.history_csv());
  const Modulation m = result.modulation();
  const auto grid = uniform_grid(m.t_f(), cfg.grid_points);
  const Modulation gz = gz_from_gc(m, cfg.system.omega_r);
  out.add("modulation.csv", modulation_table(m, gz, grid));
  out.summary["final_snr"] = result.final_snr;
  out.summary["incumbent_snr"] = result.incumbent_snr;
  out.summary["fitness"] = result.fitness;
  out.summary["constraints_passed"] = result.constraint_residuals.passed;
  readout_artifacts(cfg, m, out);
}

void run_oracle(const ExperimentConfig& cfg, Artifacts& out) {
  const SystemParams& p = cfg.system;
  EvolutionConfig ec = cfg.evolution.value_or(EvolutionConfig{});
  if (cfg.fock_truncation) ec.fock_truncation = *cfg.fock_truncation;
  const Modulation gc = ansatz_gc(cfg);
  const Modulation gz = gz_from_gc(gc, p.omega_r);
  const auto grid = uniform_grid(p.t_f, cfg.grid_points);
  const auto rho0 = QubitCavityState::branch_mixture(0.5, ec.fock_truncation);
  const auto oracle = evolve_master(p, gz, rho0, ec, grid);
  const auto analytic = make_trajectory(gc, p.kappa, grid);
  const auto driven = make_trajectory(gz, p.kappa, grid);
  out.add("oracle.csv", oracle_csv(oracle));
  out.add("analytic.csv", trajectory_csv(analytic));
  const double agreement = oracle_agreement(oracle, analytic);
  json report{{"agreement_design_field", agreement},
              {"agreement_coupling_field", oracle_agreement(oracle, driven)},
              {"tolerance", 1e-3},
              {"within_tolerance", agreement < 1e-3},
              {"max_trace_drift", oracle.max_trace_drift()},
              {"max_sigma_z_drift", oracle.max_sigma_z_drift()},
              {"steps", oracle.steps},
              {"fock_truncation", oracle.fock_truncation},
              {"evolution", evolution_json(ec)}};
  out.add_json("agreement.json", report);
  out.summary = report;
  out.summary["ansatz"] = to_string(cfg.ansatz);
}

void run_circuit(const ExperimentConfig& cfg, Artifacts& out) {
  const CircuitParams& cp = *cfg.circuit;
  json report = circuit_report(cp);
  std::vector<double> sweep_grid(181);
  for (int i = 0; i < 181; ++i) sweep_grid[i] = kPi * i / 180.0;
  const auto sweep = spectrum_sweep(cp, sweep_grid, 4);
  const double flat = flatness_ratio(cp, sweep);
  report["flatness"] = {{"ratio", flat}, {"bound", 1.0}, {"within_bound", flat <= 1.0 + 1e-9}};
  out.add_json("report.json", report);
  out.add("spectrum.csv", sweep.csv());
  out.summary = {{"omega_q_exact", report["omega_q"]["exact_splitting"]},
                 {"g_z", report["g_z"]["at_target_omega_q"]},
                 {"flatness_ratio", flat}};
}

void run_oct(const ExperimentConfig& cfg, Artifacts& out) {
  const ControlSpec spec = cfg.control.value_or(ControlSpec{});
  ControlProblem problem =
      ControlProblem::from_system(cfg.system, spec.u_max > 0.0 ? spec.u_max : kQuotedCouplingBound);
  problem.k_max = spec.k_max;
  const auto report = minimal_time(problem);

  const double period = report.t_zero_return;
  const auto grid = uniform_grid(period, spec.arc_points);
  const auto arc = bang_trajectory(problem.u_max, problem.omega_r, grid);
  io::CsvWriter arc_csv({"t", "g_c", "g_d", "invariant"});
  const double r2 = problem.u_max * problem.u_max;
  double drift = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double inv = arc_invariant(arc.first[i], arc.second[i], problem.u_max, problem.omega_r);
    drift = std::max(drift, std::abs(inv - r2) / r2);
    arc_csv.row({grid[i], arc.first[i], arc.second[i], inv});
  }
  const auto adjoint = adjoint_trajectory(1.0, 0.0, problem.omega_r, uniform_grid(report.t_min, 64 * report.k + 1));
  io::CsvWriter adj_csv({"t", "p_g", "p_d"});
  for (std::size_t i = 0; i < adjoint.times.size(); ++i) {
    adj_csv.row({adjoint.times[i], adjoint.first[i], adjoint.second[i]});
  }
  out.add("bang_arc.csv", arc_csv.str());
  out.add("adjoint.csv", adj_csv.str());

  json j = report.to_json();
  j["u_max"] = problem.u_max;
  j["target_displacement"] = problem.target_displacement;
  j["zero_return_residual"] = std::hypot(arc.first.back() / problem.u_max,
                                         arc.second.back() / (problem.u_max * problem.omega_r));
  j["invariant_relative_drift"] = drift;
  j["switch_times"] = switch_times(adjoint);
  out.add_json("report.json", j);
  out.summary = j;
  report.require_feasible();
}

Artifacts run_scenario(const ExperimentConfig& cfg) {
  Artifacts out;
  switch (cfg.scenario) {
    case Scenario::DesignPoly:
    case Scenario::DesignTrig:
    case Scenario::Baseline:
      run_design(cfg, out);
      break;
    case Scenario::CDFrame:
      run_cd_frame(cfg, out);
      break;
    case Scenario::Floquet:
      run_floquet(cfg, out);
      break;
    case Scenario::GA:
      run_ga(cfg, out);
      break;
    case Scenario::Oracle:
      run_oracle(cfg, out);
      break;
    case Scenario::Circuit:
      run_circuit(cfg, out);
      break;
    case Scenario::OCT:
      run_oct(cfg, out);
      break;
  }
  return out;
}

std::vector<ManifestEntry> write_artifacts(const std::filesystem::path& dir,
                                           const std::vector<std::pair<std::string, std::string>>& files,
                                           const json& config_echo) {
  std::vector<ManifestEntry> entries;
  json listing = json::array();
  for (const auto& [name, contents] : files) {
    io::write_file(dir / name, contents);
    entries.push_back({name, io::sha256_hex(contents), contents.size()});
    listing.push_back({{"name", name}, {"sha256", entries.back().sha256}, {"bytes", contents.size()}});
  }
  const json manifest{{"schema_version", kSchemaVersion}, {"config", config_echo}, {"files", listing}};
  io::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return entries;
}

bool same_grid(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-12 * std::max(std::abs(a[i]), std::abs(b[i]))) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(Scenario s) {
  for (const auto& [value, name] : kScenarioNames) {
    if (value == s) return name;
  }
  return "unknown";
}

Scenario scenario_from_string(std::string_view name) {
  for (const auto& [value, label] : kScenarioNames) {
    if (label == name) return value;
  }
  throw ConfigError("/scenario", "unknown scenario '" + std::string(name) + "'");
}

std::string_view to_string(Ansatz a) { return a == Ansatz::Polynomial ? "polynomial" : "trigonometric"; }

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  Block b(j, "",
          {"schema_version", "scenario", "system", "ansatz", "output_dir", "seed", "grid_points", "tau_points",
           "homodyne_angle", "fit_window", "fock_truncation", "squeeze", "floquet", "ga", "circuit", "evolution",
           "control"});
  ExperimentConfig c;
  if (!b.has("schema_version")) throw ConfigError("/schema_version", "missing schema_version");
  c.schema_version = b.integer("schema_version", 0);
  if (c.schema_version != kSchemaVersion) {
    throw ConfigError("/schema_version", "unsupported schema version " + std::to_string(c.schema_version));
  }
  if (!b.has("scenario")) throw ConfigError("/scenario", "missing scenario");
  c.scenario = scenario_from_string(b.string("scenario", ""));
  if (b.has("system")) c.system = parse_system(b.raw("system"));
  if (b.has("ansatz")) {
    if (!uses_ansatz(c.scenario)) {
      throw ConfigError("/ansatz", "scenario " + std::string(to_string(c.scenario)) + " does not take an ansatz");
    }
    c.ansatz = ansatz_from_string(b.string("ansatz", ""));
  }
  c.output_dir = b.string("output_dir", c.output_dir.string());
  c.seed = b.unsigned_integer("seed", c.seed);
  c.grid_points = b.integer("grid_points", c.grid_points);
  if (c.grid_points < 3) throw ConfigError("/grid_points", "must be at least 3");
  c.tau_points = b.integer("tau_points", c.tau_points);
  if (c.tau_points < 2) throw ConfigError("/tau_points", "must be at least 2");
  c.homodyne_angle = b.number("homodyne_angle", c.homodyne_angle);
  if (b.has("fit_window")) {
    const json& w = b.raw("fit_window");
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
      throw ConfigError("/fit_window", "expected [lo, hi] in units of t_f");
    }
    c.fit_window = {w[0].get<double>(), w[1].get<double>()};
    if (!(c.fit_window.first > 0.0 && c.fit_window.first < c.fit_window.second && c.fit_window.second <= 1.0)) {
      throw ConfigError("/fit_window", "need 0 < lo < hi <= 1");
    }
  }
  if (b.has("fock_truncation")) {
    c.fock_truncation = b.integer("fock_truncation", 0);
    if (*c.fock_truncation < 2) throw ConfigError("/fock_truncation", "must be at least 2");
  }

  const auto [allowed, required] = scenario_block(c.scenario);
  std::vector<std::string_view> present;
  for (auto name : kBlocks) {
    if (b.has(name)) present.push_back(name);
  }
  if (present.size() > 1) {
    throw ConfigError("/" + std::string(present[1]), "only one scenario block may be given");
  }
  if (!present.empty() && present.front() != allowed) {
    throw ConfigError("/" + std::string(present.front()),
                      "block not used by scenario " + std::string(to_string(c.scenario)));
  }
  if (required && present.empty()) {
    throw ConfigError("/" + std::string(allowed), "scenario " + std::string(to_string(c.scenario)) +
                                                      " needs a '" + std::string(allowed) + "' block");
  }
  if (b.has("squeeze")) c.squeeze = parse_squeeze(b.raw("squeeze"));
  if (b.has("floquet")) c.floquet = parse_floquet(b.raw("floquet"), c.system);
  if (b.has("ga")) c.ga = parse_ga(b.raw("ga"));
  if (b.has("circuit")) c.circuit = parse_circuit(b.raw("circuit"));
  if (b.has("evolution")) c.evolution = parse_evolution(b.raw("evolution"));
  if (b.has("control")) c.control = parse_control(b.raw("control"));
  if (c.squeeze) c.homodyne_angle = c.squeeze->phi;
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("", "config file " + path.string() + " does not exist");
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json j{{"schema_version", schema_version},
         {"scenario", to_string(scenario)},
         {"system", system_json(system)},
         {"output_dir", output_dir.generic_string()},
         {"seed", seed},
         {"grid_points", grid_points},
         {"tau_points", tau_points},
         {"homodyne_angle", homodyne_angle},
         {"fit_window", {fit_window.first, fit_window.second}}};
  if (uses_ansatz(scenario)) j["ansatz"] = to_string(ansatz);
  if (fock_truncation) j["fock_truncation"] = *fock_truncation;
  if (squeeze) j["squeeze"] = squeeze_json(*squeeze);
  if (floquet) j["floquet"] = {{"Omega", floquet->Omega}, {"nu", floquet->nu}};
  if (ga) {
    j["ga"] = ga->to_json();
    j["ga"].erase("seed");
  }
  if (circuit) j["circuit"] = circuit->to_json();
  if (evolution) j["evolution"] = evolution_json(*evolution);
  if (control) {
    j["control"] = {{"u_max", control->u_max}, {"k_max", control->k_max}, {"arc_points", control->arc_points}};
  }
  return j;
}

std::string ExperimentConfig::digest() const {
  json j = to_json();
  j.erase("output_dir");
  return io::sha256_hex(j.dump()).substr(0, 12);
}

std::filesystem::path ExperimentConfig::run_directory() const {
  return output_dir / (std::string(to_string(scenario)) + "-" + digest());
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  Artifacts art = run_scenario(cfg);
  art.summary["scenario"] = to_string(cfg.scenario);
  art.add_json("summary.json", art.summary);
  RunResult r;
  r.directory = cfg.run_directory();
  r.files = write_artifacts(r.directory, art.files, cfg.to_json());
  r.summary = std::move(art.summary);
  r.trajectory = std::move(art.trajectory);
  r.snr = std::move(art.snr);
  return r;
}

ComparisonResult compare_experiments(const std::vector<ExperimentConfig>& configs,
                                     const std::filesystem::path& output_dir) {
  if (configs.size() < 2) throw InputError("compare needs at least two configs");
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const Scenario s = configs[i].scenario;
    if (s != Scenario::DesignPoly && s != Scenario::DesignTrig && s != Scenario::Baseline && s != Scenario::GA) {
      throw ConfigError("/scenario", "config " + std::to_string(i) + ": scenario " + std::string(to_string(s)) +
                                         " has no readout trajectory to compare");
    }
  }

  // Identical configs share a run directory, so each distinct digest runs once.
  std::map<std::string, std::size_t> first_of;
  std::vector<std::size_t> unique;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (first_of.emplace(configs[i].digest(), i).second) unique.push_back(i);
  }
  std::vector<RunResult> runs(configs.size());
  parallel_for(unique.size(), [&](std::size_t k) { runs[unique[k]] = run_experiment(configs[unique[k]]); });
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::size_t src = first_of.at(configs[i].digest());
    if (src != i) runs[i] = runs[src];
  }

  const auto& ref_traj = *runs[0].trajectory;
  const auto& ref_snr = *runs[0].snr;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (!same_grid(runs[i].trajectory->times, ref_traj.times)) {
      throw AlignmentError("config " + std::to_string(i) + " uses a different time grid from config 0");
    }
    if (!same_grid(runs[i].snr->taus, ref_snr.taus)) {
      throw AlignmentError("config " + std::to_string(i) + " uses a different tau grid from config 0");
    }
  }

  std::vector<std::string> labels;
  std::vector<std::vector<double>> seps;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    labels.push_back(std::to_string(i) + "_" + std::string(to_string(configs[i].scenario)));
    seps.push_back(pointer_separation(*runs[i].trajectory));
  }

  std::vector<std::string> sep_header{"t"}, snr_header{"tau"};
  for (const auto& l : labels) {
    sep_header.push_back("d_" + l);
    snr_header.push_back("snr_" + l);
  }
  for (std::size_t i = 1; i < labels.size(); ++i) snr_header.push_back("snr_ratio_" + labels[i]);
  io::CsvWriter sep_csv(sep_header), snr_table(snr_header);
  for (std::size_t k = 0; k < ref_traj.times.size(); ++k) {
    std::vector<double> row{ref_traj.times[k]};
    for (const auto& d : seps) row.push_back(d[k]);
    sep_csv.row(row);
  }
  for (std::size_t k = 0; k < ref_snr.taus.size(); ++k) {
    std::vector<double> row{ref_snr.taus[k]};
    for (const auto& r : runs) row.push_back(r.snr->snr[k]);
    for (std::size_t i = 1; i < runs.size(); ++i) row.push_back(runs[i].snr->snr[k] / ref_snr.snr[k]);
    snr_table.row(row);
  }

  json summary{{"reference", labels[0]}, {"runs", json::array()}};
  json echoes = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    json entry{{"label", labels[i]},
               {"directory", runs[i].directory.generic_string()},
               {"separation_tf", seps[i].back()},
               {"snr_tf", runs[i].snr->snr.back()},
               {"separation_ratio_tf", seps[i].back() / seps[0].back()},
               {"snr_ratio_tf", runs[i].snr->snr.back() / ref_snr.snr.back()},
               {"scaling_exponent", runs[i].summary["scaling_fit"]["exponent"]}};
    summary["runs"].push_back(entry);
    echoes.push_back(configs[i].to_json());
  }

  std::string joined;
  for (const auto& c : configs) joined += c.digest();
  ComparisonResult out;
  out.directory = output_dir / ("compare-" + io::sha256_hex(joined).substr(0, 12));
  out.separation_csv = sep_csv.str();
  out.snr_csv = snr_table.str();
  out.summary = summary;
  out.files = write_artifacts(out.directory,
                              {{"comparison_separation.csv", out.separation_csv},
                               {"comparison_snr.csv", out.snr_csv},
                               {"summary.json", summary.dump(2) + "\n"}},
                              echoes);
  return out;
}

json error_json(const std::exception& e) {
  json err{{"message", e.what()}};
  if (const auto* le = dynamic_cast<const Error*>(&e)) {
    err["kind"] = le->kind();
    if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) err["field"] = ce->field();
    if (const auto* te = dynamic_cast<const TruncationError*>(&e)) {
      err["suggested_truncation"] = te->suggested_truncation();
    }
  } else if (dynamic_cast<const json::exception*>(&e)) {
    err["kind"] = "schema";
  } else {
    err["kind"] = "internal";
  }
  return {{"error", err}};
}

}  // namespace longi
