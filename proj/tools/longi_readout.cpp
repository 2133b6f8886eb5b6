// Command-line driver: each subcommand runs one JSON experiment config and
// writes its artifacts under <output_dir>/<scenario>-<digest>/.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "longi/errors.hpp"
#include "longi/experiment.hpp"
#include "longi/io.hpp"

namespace {

using longi::Scenario;
using nlohmann::json;

struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> fock;
};

const std::map<std::string, std::set<Scenario>>& subcommand_scenarios() {
  static const std::map<std::string, std::set<Scenario>> table{
      {"design", {Scenario::DesignPoly, Scenario::DesignTrig, Scenario::Baseline}},
      {"snr", {Scenario::DesignPoly, Scenario::DesignTrig, Scenario::Baseline, Scenario::GA}},
      {"simulate", {Scenario::Oracle, Scenario::CDFrame}},
      {"floquet", {Scenario::Floquet}},
      {"ga", {Scenario::GA}},
      {"circuit", {Scenario::Circuit}},
      {"oct", {Scenario::OCT}},
  };
  return table;
}

longi::ExperimentConfig load(const std::string& path, const Overrides& o) {
  if (!std::filesystem::exists(path)) throw longi::ConfigError("", "config file " + path + " does not exist");
  json doc;
  try {
    doc = json::parse(longi::io::read_file(path));
  } catch (const json::parse_error& e) {
    throw longi::ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw longi::ConfigError("", "config must be a JSON object");
  if (o.out) doc["output_dir"] = *o.out;
  if (o.seed) doc["seed"] = *o.seed;
  if (o.fock) doc["fock_truncation"] = *o.fock;
  return longi::ExperimentConfig::from_json(doc);
}

json manifest_json(const std::filesystem::path& dir, const std::vector<longi::ManifestEntry>& files) {
  json listing = json::array();
  for (const auto& f : files) listing.push_back({{"name", f.name}, {"sha256", f.sha256}});
  return {{"directory", dir.generic_string()}, {"files", listing}};
}

int fail(const std::exception& e, const std::optional<std::filesystem::path>& dir) {
  const json err = longi::error_json(e);
  std::cout << err.dump(2) << std::endl;
  if (dir) {
    try {
      longi::io::write_file(*dir / "error.json", err.dump(2) + "\n");
    } catch (const std::exception&) {
      // The error already went to stdout.
    }
  }
  return dynamic_cast<const longi::ConfigError*>(&e) ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Longitudinal-coupling readout design and simulation"};
  app.require_subcommand(1);

  Overrides overrides;
  std::string config_path;
  std::vector<std::string> compare_paths;
  std::string compare_out = "out";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option_function<std::string>("--out", [&](const std::string& v) { overrides.out = v; },
                                          "Output directory (overrides output_dir)");
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { overrides.seed = v; },
                                            "Random seed (overrides seed)");
    sub->add_option_function<int>("--fock", [&](const int& v) { overrides.fock = v; },
                                  "Fock truncation N (overrides fock_truncation)")
        ->check(CLI::PositiveNumber);
  };

  for (const auto& [name, scenarios] : subcommand_scenarios()) {
    auto* sub = app.add_subcommand(name, "Run a " + name + " experiment config");
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required();
    add_common(sub);
  }
  auto* cmp = app.add_subcommand("compare", "Run several configs and tabulate them side by side");
  cmp->add_option("--config", compare_paths, "Experiment configs (JSON), at least two")->required()->expected(2, -1);
  cmp->add_option_function<std::string>("--out", [&](const std::string& v) { overrides.out = v; },
                                        "Output directory for every run and the comparison");
  cmp->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { overrides.seed = v; },
                                          "Random seed applied to every config");
  cmp->add_option_function<int>("--fock", [&](const int& v) { overrides.fock = v; }, "Fock truncation N")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  std::optional<std::filesystem::path> run_dir;
  try {
    if (cmp->parsed()) {
      std::vector<longi::ExperimentConfig> configs;
      for (const auto& p : compare_paths) configs.push_back(load(p, overrides));
      if (overrides.out) compare_out = *overrides.out;
      else compare_out = configs.front().output_dir.string();
      const auto result = longi::compare_experiments(configs, compare_out);
      run_dir = result.directory;
      json out = manifest_json(result.directory, result.files);
      out["summary"] = result.summary;
      std::cout << out.dump(2) << std::endl;
      return EXIT_SUCCESS;
    }
    for (const auto& [name, scenarios] : subcommand_scenarios()) {
      if (!app.got_subcommand(name)) continue;
      const auto cfg = load(config_path, overrides);
      if (!scenarios.contains(cfg.scenario)) {
        throw longi::ConfigError("/scenario", "subcommand '" + name + "' cannot run scenario " +
                                                  std::string(longi::to_string(cfg.scenario)));
      }
      run_dir = cfg.run_directory();
      const auto result = longi::run_experiment(cfg);
      json out = manifest_json(result.directory, result.files);
      out["summary"] = result.summary;
      std::cout << out.dump(2) << std::endl;
      return EXIT_SUCCESS;
    }
  } catch (const std::exception& e) {
    return fail(e, run_dir);
  }
  return EXIT_FAILURE;
}
