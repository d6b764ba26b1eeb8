#include "accessplan/manifest.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "accessplan/config.hpp"
#include "accessplan/errors.hpp"
#include "accessplan/geojson.hpp"

namespace accessplan {

using nlohmann::json;

std::string utc_timestamp()
{
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json to_json(const RunManifest& m)
{
  json outputs = json::array();
  for (const OutputEntry& o : m.outputs) outputs.push_back({{"path", o.path}, {"sha256", o.sha256}});
  return json{{"run_id", m.run_id},
              {"command", m.command},
              {"config_hash", m.config_hash},
              {"inputs", m.inputs},
              {"version", m.version},
              {"started", m.started},
              {"finished", m.finished},
              {"outputs", outputs},
              {"details", m.details}};
}

void write_manifest(const std::filesystem::path& dir, RunManifest manifest)
{
  manifest.outputs.clear();
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = std::filesystem::relative(entry.path(), dir).generic_string();
    if (rel == "manifest.json") continue;
    manifest.outputs.push_back({rel, file_sha256(entry.path())});
  }
  std::sort(manifest.outputs.begin(), manifest.outputs.end(),
            [](const OutputEntry& a, const OutputEntry& b) { return a.path < b.path; });
  if (manifest.run_id.empty()) manifest.run_id = dir.filename().string();
  manifest.finished = utc_timestamp();
  write_json(dir / "manifest.json", to_json(manifest));
}

RunManifest read_manifest(const std::filesystem::path& dir)
{
  const json doc = read_json(dir / "manifest.json");
  try {
    RunManifest m;
    m.run_id = doc.at("run_id").get<std::string>();
    m.command = doc.at("command").get<std::string>();
    m.config_hash = doc.at("config_hash").get<std::string>();
    m.inputs = doc.at("inputs").get<std::map<std::string, std::string>>();
    m.version = doc.at("version").get<std::string>();
    m.started = doc.at("started").get<std::string>();
    m.finished = doc.at("finished").get<std::string>();
    for (const json& o : doc.at("outputs")) m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>()});
    m.details = doc.value("details", json::object());
    return m;
  } catch (const json::exception& e) {
    throw ValidationError("malformed manifest in " + dir.string() + ": " + e.what());
  }
}

}  // namespace accessplan
