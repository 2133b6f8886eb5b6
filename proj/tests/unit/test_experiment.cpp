#include <cmath>
#include <filesystem>
#include <map>
#include <random>

#include "doctest.h"
#include "support.hpp"

#include "longi/errors.hpp"
#include "longi/experiment.hpp"
#include "longi/io.hpp"

using namespace longi;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
  std::random_device rd;
  const auto p = fs::temp_directory_path() / ("longi_" + tag + "_" + std::to_string(rd()));
  fs::remove_all(p);
  return p;
}

std::string config_error_field(const json& j) {
  try {
    ExperimentConfig::from_json(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}

json small(const std::string& scenario) {
  return {{"schema_version", 1}, {"scenario", scenario}, {"grid_points", 201}, {"tau_points", 40}};
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = io::read_file(e.path());
  return out;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("SHA-256 reference vector") {
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config errors point at the offending field") {
  CHECK(config_error_field(json{{"scenario", "DesignTrig"}}) == "/schema_version");
  CHECK(config_error_field(json{{"schema_version", 2}, {"scenario", "DesignTrig"}}) == "/schema_version");
  CHECK(config_error_field(json{{"schema_version", 1}, {"scenario", "Nope"}}) == "/scenario");
  auto j = small("DesignTrig");
  j["system"] = {{"g_zz", 1.0}};
  CHECK(config_error_field(j) == "/system/g_zz");
  j = small("DesignTrig");
  j["system"] = {{"kappa", -1.0}};
  CHECK(config_error_field(j).rfind("/system", 0) == 0);
  j = small("DesignTrig");
  j["grid_points"] = "many";
  CHECK(config_error_field(j) == "/grid_points");
  j = small("DesignTrig");
  j["extra"] = 1;
  CHECK(config_error_field(j) == "/extra");
  // Blocks belong to their scenario.
  j = small("DesignTrig");
  j["ga"] = json::object();
  CHECK(config_error_field(j) == "/ga");
  CHECK(config_error_field(small("Floquet")) == "/floquet");
  j = small("DesignTrig");
  j["squeeze"] = {{"r", 1.0}, {"db", 3.0}};
  CHECK(config_error_field(j).rfind("/squeeze", 0) == 0);
  j = small("Floquet");
  j["floquet"] = {{"Omega", 3.8317059702075123}, {"nu", 1e9}};
  CHECK(config_error_field(j).rfind("/floquet", 0) == 0);
  j = small("DesignTrig");
  j["ansatz"] = "polynomial";
  CHECK(config_error_field(j) == "/ansatz");
}

TEST_CASE("config echo round-trips and fixes the digest") {
  auto j = small("DesignTrig");
  j["squeeze"] = {{"db", 20}};
  const auto cfg = ExperimentConfig::from_json(j);
  const auto again = ExperimentConfig::from_json(cfg.to_json());
  CHECK(again.to_json() == cfg.to_json());
  CHECK(again.digest() == cfg.digest());
  CHECK(cfg.digest().size() == 12);
  CHECK(cfg.squeeze->r == doctest::Approx(std::log(10.0)));
  auto moved = cfg;
  moved.output_dir = "elsewhere";
  CHECK(moved.digest() == cfg.digest());
  auto other = cfg;
  other.seed = 2;
  CHECK(other.digest() != cfg.digest());
  CHECK(cfg.run_directory() == fs::path("out") / ("DesignTrig-" + cfg.digest()));
}

TEST_CASE("design run writes a complete, reproducible manifest") {
  const auto root = scratch_dir("design");
  auto j = small("DesignTrig");
  j["output_dir"] = root.string();
  const auto cfg = ExperimentConfig::from_json(j);
  const auto first = run_experiment(cfg);
  CHECK(first.directory == cfg.run_directory());
  const auto tree = read_tree(first.directory);
  for (const char* name : {"modulation.csv", "boundary.json", "trajectory.csv", "snr.csv", "summary.json", "manifest.json"})
    CHECK(tree.count(name) == 1);
  const auto manifest = json::parse(tree.at("manifest.json"));
  CHECK(manifest["config"] == cfg.to_json());
  std::size_t listed = 0;
  for (const auto& f : manifest["files"]) {
    const auto name = f["name"].get<std::string>();
    REQUIRE(tree.count(name) == 1);
    CHECK(f["sha256"] == io::sha256_hex(tree.at(name)));
    CHECK(f["bytes"].get<std::size_t>() == tree.at(name).size());
    ++listed;
  }
  CHECK(listed + 1 == tree.size());
  CHECK(first.summary["boundary_passed"] == false);

  fs::remove_all(first.directory);
  const auto second = run_experiment(cfg);
  CHECK(read_tree(second.directory) == tree);
  fs::remove_all(root);
}

TEST_CASE("oracle scenario reports agreement") {
  const auto root = scratch_dir("oracle");
  auto j = small("Oracle");
  j["output_dir"] = root.string();
  j["ansatz"] = "polynomial";
  j["system"] = {{"g_z0", 2 * testing_support::kPi * 21e3}};
  j["evolution"] = {{"method", "RK4"}, {"fock_truncation", 20}};
  const auto r = run_experiment(ExperimentConfig::from_json(j));
  CHECK(r.summary["within_tolerance"] == true);
  CHECK(r.summary["agreement_coupling_field"].get<double>() < 1e-8);
  CHECK(r.summary["max_sigma_z_drift"].get<double>() < 1e-10);
  fs::remove_all(root);
}

TEST_CASE("oracle truncation failure carries a suggestion") {
  auto j = small("Oracle");
  j["evolution"] = {{"method", "RK4"}, {"fock_truncation", 20}};
  j["output_dir"] = scratch_dir("trunc").string();
  try {
    run_experiment(ExperimentConfig::from_json(j));
    FAIL("expected a truncation error");
  } catch (const TruncationError& e) {
    const auto err = error_json(e)["error"];
    CHECK(err["kind"] == "truncation");
    CHECK(err["suggested_truncation"].get<int>() >= 42);
  }
}

TEST_CASE("comparison tables") {
  const auto root = scratch_dir("compare");
  auto a = small("DesignTrig");
  auto b = small("DesignTrig");
  b["squeeze"] = {{"r", 0.5}};
  auto c = small("Baseline");
  std::vector<ExperimentConfig> cfgs{ExperimentConfig::from_json(a), ExperimentConfig::from_json(a),
                                     ExperimentConfig::from_json(b), ExperimentConfig::from_json(c)};
  const auto r = compare_experiments(cfgs, root);
  const auto& runs = r.summary["runs"];
  CHECK(runs[1]["snr_ratio_tf"].get<double>() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(runs[1]["separation_ratio_tf"].get<double>() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(runs[2]["snr_ratio_tf"].get<double>() == doctest::Approx(std::exp(0.5)).epsilon(1e-9));
  CHECK(runs[2]["separation_ratio_tf"].get<double>() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(runs[3]["separation_ratio_tf"].get<double>() < 0.1);
  CHECK(r.separation_csv.rfind("t,d_0_DesignTrig,d_1_DesignTrig,d_2_DesignTrig,d_3_Baseline\n", 0) == 0);
  CHECK(fs::exists(r.directory / "manifest.json"));

  auto misaligned = small("DesignTrig");
  misaligned["grid_points"] = 301;
  CHECK_THROWS_AS(compare_experiments({cfgs[0], ExperimentConfig::from_json(misaligned)}, root), AlignmentError);
  CHECK_THROWS_AS(compare_experiments({ExperimentConfig::from_json(small("Circuit"))}, root), ConfigError);
  fs::remove_all(root);
}

TEST_CASE("error documents") {
  const auto e = error_json(ConfigError("/ga/population", "too small"))["error"];
  CHECK(e["kind"] == "schema");
  CHECK(e["field"] == "/ga/population");
  CHECK(e["message"] == "too small");
  CHECK(error_json(std::runtime_error("x"))["error"]["kind"] == "internal");
  CHECK(error_json(InfeasibleError("no"))["error"]["kind"] == "infeasible");
}

}  // TEST_SUITE
