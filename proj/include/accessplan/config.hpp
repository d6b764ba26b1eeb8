#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "accessplan/pipeline.hpp"
#include "accessplan/policy.hpp"

namespace accessplan {

struct SamplingConfig {
  std::size_t n = 500;
  std::uint64_t seed = 1;
};

/// Everything a run needs. An empty JSON document yields the paper's constants.
struct RunConfig {
  std::filesystem::path network;  // GeoJSON; empty: built-in synthetic site
  std::filesystem::path blocks;
  double snap_tolerance = 0.5;
  double buffer = 2.0;
  Policy policy;
  EvaluationSettings settings;
  PolicySpace space;  // space.baseline mirrors policy
  SamplingConfig sampling;

  bool has_site_files() const { return !network.empty() || !blocks.empty(); }
};

RunConfig default_run_config();

/// Unknown keys and malformed values throw ValidationError. Relative paths resolve against base_dir.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON with every field spelled out.
nlohmann::json to_json(const RunConfig& config);

/// SHA-256 of the canonical JSON without the thread count.
std::string config_hash(const RunConfig& config);

nlohmann::json policy_to_json(const Policy& policy);
/// Fields absent from `doc` keep their value in `base`.
Policy policy_from_json(const nlohmann::json& doc, const Policy& base);

std::string sha256_hex(const std::string& bytes);
std::string file_sha256(const std::filesystem::path& path);

}  // namespace accessplan
