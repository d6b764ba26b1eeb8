#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace accessplan {

inline constexpr const char* kToolVersion = "1.0.0";

struct OutputEntry {
  std::string path;  // relative to the run directory
  std::string sha256;
};

struct RunManifest {
  std::string run_id;
  std::string command;
  std::string config_hash;
  std::map<std::string, std::string> inputs;  // path -> sha256
  std::string version = kToolVersion;
  std::string started;
  std::string finished;
  std::vector<OutputEntry> outputs;
  nlohmann::json details = nlohmann::json::object();
};

std::string utc_timestamp();

/// Indexes every file under `dir` (except manifest.json), records `finished`, and writes manifest.json.
void write_manifest(const std::filesystem::path& dir, RunManifest manifest);
RunManifest read_manifest(const std::filesystem::path& dir);

nlohmann::json to_json(const RunManifest& m);

}  // namespace accessplan
