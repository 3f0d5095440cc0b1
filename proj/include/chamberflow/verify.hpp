#pragma once

#include "chamberflow/types.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace chamberflow {

struct RunConfig {
  int n = 3;
  std::uint64_t seed = 42;
  Config tol;
  std::size_t max_words = 200000;
  int max_power = 40;
  int mc_samples = 10000;
  double r = 0.15;
  double eps = 0.05;
  int workers = 0;  // 0 = all cores
  std::string out_dir = ".";
};

nlohmann::json to_json(const RunConfig& cfg);
// Missing keys keep their defaults; unknown keys and wrong types raise InvalidInput.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
// FNV-1a over the canonical JSON of the config (worker count and output directory excluded).
std::string config_hash(const RunConfig& cfg);

struct IdentityResult {
  std::string name;
  std::size_t instances = 0;
  double max_residual = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string note;
  double seconds = 0.0;
};

// Each suite returns one row per identity. Residuals are compared with `bound` as residual <= bound.
std::vector<IdentityResult> suite_decompositions(const RunConfig& cfg);
std::vector<IdentityResult> suite_cocycles(const RunConfig& cfg);
std::vector<IdentityResult> suite_hopf(const RunConfig& cfg);
std::vector<IdentityResult> suite_loxodromic(const RunConfig& cfg);
std::vector<IdentityResult> suite_prop_crucial(const RunConfig& cfg);
std::vector<IdentityResult> suite_sign_group(const RunConfig& cfg);
std::vector<IdentityResult> suite_density(const RunConfig& cfg);
std::vector<IdentityResult> suite_mix_probe(const RunConfig& cfg);

std::vector<std::string> suite_names();

struct VerifyReport {
  RunConfig config;
  std::vector<IdentityResult> results;
  bool pass = true;
};

// Runs the named suites in order ("all" or an empty list runs every suite).
VerifyReport run_verify(const RunConfig& cfg, const std::vector<std::string>& suites = {});

// Report JSON. Timings and the timestamp sit under "timing" and "timestamp", outside the
// deterministic part; strip_volatile removes both.
nlohmann::json report_json(const VerifyReport& report, const std::string& timestamp);
nlohmann::json strip_volatile(nlohmann::json j);

}  // namespace chamberflow
