#include "accessplan/service.hpp"

#include <chrono>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "accessplan/errors.hpp"
#include "accessplan/geojson.hpp"
#include "accessplan/manifest.hpp"
#include "accessplan/records_io.hpp"

namespace accessplan {

using nlohmann::json;

namespace {

HttpResponse reply(int status, const json& body) { return {status, body.dump(), "application/json"}; }

HttpResponse error_reply(int status, const std::string& message, const std::vector<std::string>& details = {})
{
  json body{{"error", message}};
  if (!details.empty()) body["details"] = details;
  return reply(status, body);
}

std::vector<std::string> split_path(const std::string& path)
{
  std::vector<std::string> parts;
  std::string cur;
  const std::string clean = path.substr(0, path.find('?'));
  for (char c : clean) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

bool safe_name(const std::string& name)
{
  if (name.empty() || name == "." || name == "..") return false;
  return name.find_first_of("/\\") == std::string::npos;
}

json use_json(const UseVector& v)
{
  json out = json::object();
  for (Use u : kAllUses) out[std::string(1, use_code(u))] = v[index_of(u)];
  return out;
}

struct Frontier {
  std::vector<std::size_t> front;
  KneeResult knee;
};

Frontier frontier_of(const std::vector<ObjectiveRecord>& records)
{
  Frontier f;
  f.front = pareto_front(records);
  if (f.front.empty()) throw InfeasibleError("run has no valid records");
  f.knee = knee_point(records, f.front);
  return f;
}

}  // namespace

json evaluation_json(const Site& site, const Evaluation& ev, const EvaluationSettings& settings, bool include_blocks)
{
  const Policy& policy = ev.policy;
  ObjectiveRecord rec;
  rec.params = policy.parameters();
  rec.priority = priority_string(policy.priority);
  rec.valid = true;
  rec.raw = ev.raw;
  json record = record_json(rec);
  record.erase("normalized");
  record["objectives"] = {{"one_minus_AU", 1.0 - ev.raw.au},
                          {"D_B", ev.raw.d_b},
                          {"D_LU", ev.raw.d_lu},
                          {"D_CS", ev.raw.d_cs},
                          {"JH_pen", ev.raw.jh_pen}};
  const ShareDiagnostics shares = share_deviation(ev.allocation.achieved, policy.shares);
  const ConstructionDiagnostics& cons = ev.intensity.diagnostics;
  json out{{"policy", policy_to_json(policy)},
           {"record", record},
           {"shares",
            {{"target", use_json(policy.shares)},
             {"achieved", use_json(shares.achieved)},
             {"D_LU", shares.d_lu},
             {"MAE", shares.mae},
             {"RMSE", shares.rmse},
             {"accounting", to_string(settings.accounting)},
             {"lapsed", use_json(ev.allocation.lapsed)}}},
           {"construction",
            {{"target", use_json(policy.construction_shares)},
             {"built", use_json(cons.built)},
             {"shares", use_json(cons.shares)},
             {"D_B", cons.d_b},
             {"D_CS", cons.d_cs}}},
           {"warnings", ev.warnings}};
  if (include_blocks) {
    BlockLayers layers;
    layers.access = &ev.access;
    layers.clusters = &ev.clusters;
    layers.allocation = &ev.allocation;
    layers.intensity = &ev.intensity;
    out["blocks"] = blocks_geojson(site.blocks, layers);
  }
  return out;
}

Service::Service(std::shared_ptr<const Site> site, RunConfig config, std::filesystem::path runs_root)
    : site_(std::move(site)), config_(std::move(config)), runs_root_(std::move(runs_root))
{
  server_ = std::make_shared<httplib::Server>();
  if (!site_) return;
  const json blocks = blocks_geojson(site_->blocks);
  const json segments = network_geojson(site_->network);
  site_id_ = sha256_hex(blocks.dump() + segments.dump()).substr(0, 16);

  site_body_ = {{"site_id", site_id_}, {"total_lot_area", site_->total_lot_area}, {"warnings", site_->warnings}};
  try {
    const Evaluation base = evaluate_pipeline(*site_, config_.policy, config_.settings, nullptr, Stage::access);
    BlockLayers layers;
    layers.access = &base.access;
    site_body_["blocks"] = blocks_geojson(site_->blocks, layers);
    site_body_["segments"] = network_geojson(site_->network, base.segment_scores);
    json tiers = json::array();
    for (std::size_t l = 0; l < config_.policy.tiers.size(); ++l) {
      tiers.push_back({{"index", l}, {"tier", tier_name(config_.policy.tiers[l])}, {"radius", config_.policy.radii[l]}});
    }
    site_body_["tiers"] = tiers;
  } catch (const std::exception& e) {
    site_body_["blocks"] = blocks;
    site_body_["segments"] = segments;
    site_body_["tiers"] = json::array();
    site_body_["warnings"].push_back(std::string("baseline scores unavailable: ") + e.what());
  }
}

HttpResponse Service::handle(const std::string& method, const std::string& path, const std::string& body) const
{
  try {
    const std::vector<std::string> parts = split_path(path);
    if (method == "OPTIONS") return {204, "", "text/plain"};
    if (parts.size() == 1 && parts[0] == "site") {
      if (method != "GET") return error_reply(405, "method not allowed");
      return get_site();
    }
    if (parts.size() == 1 && parts[0] == "evaluate") {
      if (method != "POST") return error_reply(405, "method not allowed");
      return post_evaluate(body);
    }
    if (!parts.empty() && parts[0] == "runs") {
      if (method != "GET") return error_reply(405, "method not allowed");
      if (parts.size() == 1) return get_runs();
      std::string rest;
      for (std::size_t k = 2; k < parts.size(); ++k) rest += (k > 2 ? "/" : "") + parts[k];
      return get_run(parts[1], rest);
    }
    return error_reply(404, "no such endpoint: " + path);
  } catch (const ValidationError& e) {
    return error_reply(400, e.what(), e.details());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

HttpResponse Service::get_site() const
{
  if (!site_) return error_reply(409, "no site loaded");
  return reply(200, site_body_);
}

HttpResponse Service::post_evaluate(const std::string& body) const
{
  if (!site_) return error_reply(409, "no site loaded");
  json doc;
  try {
    doc = json::parse(body.empty() ? std::string("{}") : body);
  } catch (const json::parse_error& e) {
    return error_reply(400, std::string("request body is not valid JSON: ") + e.what());
  }
  Policy policy;
  try {
    policy = policy_from_json(doc, config_.policy);
    policy.validate();
  } catch (const ValidationError& e) {
    return error_reply(400, e.what(), e.details());
  }

  try {
    const Evaluation ev = evaluate_pipeline(*site_, policy, config_.settings);
    json out = evaluation_json(*site_, ev, config_.settings, true);
    out["site_id"] = site_id_;
    return reply(200, out);
  } catch (const ValidationError& e) {
    return error_reply(400, e.what(), e.details());
  } catch (const InfeasibleError& e) {
    ObjectiveRecord rec;
    rec.params = policy.parameters();
    rec.priority = priority_string(policy.priority);
    rec.valid = false;
    rec.error = e.what();
    json record = record_json(rec);
    record.erase("normalized");
    return reply(422, json{{"error", e.what()}, {"record", record}});
  }
}

HttpResponse Service::get_runs() const
{
  json runs = json::array();
  std::error_code ec;
  if (!runs_root_.empty() && std::filesystem::is_directory(runs_root_, ec)) {
    std::vector<std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(runs_root_)) {
      if (entry.is_directory() && std::filesystem::exists(entry.path() / "manifest.json")) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
      try {
        const RunManifest m = read_manifest(dir);
        json files = json::array();
        for (const OutputEntry& o : m.outputs) files.push_back(o.path);
        runs.push_back({{"id", dir.filename().string()},
                        {"command", m.command},
                        {"config_hash", m.config_hash},
                        {"started", m.started},
                        {"finished", m.finished},
                        {"files", files}});
      } catch (const ValidationError&) {
        continue;
      }
    }
  }
  return reply(200, json{{"runs", runs}});
}

HttpResponse Service::get_run(const std::string& id, const std::string& rest) const
{
  if (!safe_name(id) || runs_root_.empty()) return error_reply(404, "unknown run '" + id + "'");
  const std::filesystem::path dir = runs_root_ / id;
  if (!std::filesystem::exists(dir / "manifest.json")) return error_reply(404, "unknown run '" + id + "'");
  if (rest.empty()) return reply(200, to_json(read_manifest(dir)));

  const std::filesystem::path records_path = dir / "records.csv";
  if (!std::filesystem::exists(records_path)) return error_reply(404, "run '" + id + "' has no records");
  const std::vector<ObjectiveRecord> records = read_records_csv(records_path);

  if (rest == "records") {
    json rows = json::array();
    for (const ObjectiveRecord& r : records) rows.push_back(record_json(r));
    return reply(200, json{{"run_id", id}, {"records", rows}});
  }
  if (rest == "pareto" || rest == "knee") {
    Frontier f;
    try {
      f = frontier_of(records);
    } catch (const InfeasibleError& e) {
      return error_reply(422, e.what());
    }
    std::map<std::size_t, const ObjectiveRecord*> by_id;
    for (const ObjectiveRecord& r : records) by_id[r.id] = &r;
    if (rest == "knee") {
      json k = record_json(*by_id.at(f.knee.id));
      k["utopia_distance"] = f.knee.distance;
      return reply(200, json{{"run_id", id}, {"knee", k}});
    }
    json front = json::array();
    for (std::size_t k = 0; k < f.front.size(); ++k) {
      json r = record_json(*by_id.at(f.front[k]));
      r["utopia_distance"] = f.knee.distances[k];
      front.push_back(r);
    }
    return reply(200, json{{"run_id", id}, {"front", front}, {"knee_id", f.knee.id}});
  }
  const std::string prefix = "sensitivity/";
  if (rest.rfind(prefix, 0) == 0) {
    const std::string param = rest.substr(prefix.size());
    const bool known = std::any_of(records.begin(), records.end(), [&](const ObjectiveRecord& r) {
      return r.valid && r.param(param).has_value();
    });
    if (!known) return error_reply(404, "unknown parameter '" + param + "'");
    Frontier f;
    try {
      f = frontier_of(records);
    } catch (const InfeasibleError& e) {
      return error_reply(422, e.what());
    }
    const SensitivityReport report = sensitivity_groups(records, f.front, param);
    json groups = json::array();
    const char* names[] = {"one_minus_AU", "D_total", "JH_pen"};
    for (const SensitivityGroup& g : report.groups) {
      json objectives = json::object();
      for (std::size_t k = 0; k < 3; ++k) {
        const Quartiles& q = g.objectives[k];
        objectives[names[k]] = {{"min", q.min}, {"q1", q.q1}, {"median", q.median}, {"q3", q.q3}, {"max", q.max}};
      }
      groups.push_back({{"value", g.value}, {"count", g.count}, {"objectives", objectives}});
    }
    return reply(200, json{{"run_id", id}, {"parameter", param}, {"groups", groups}, {"notes", report.notes}});
  }
  return error_reply(404, "no such run resource '" + rest + "'");
}

void Service::listen(const std::string& host, int port)
{
  auto server = std::static_pointer_cast<httplib::Server>(server_);
  server->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                               {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                               {"Access-Control-Allow-Headers", "Content-Type"}});
  auto route = [this](const std::string& method) {
    return [this, method](const httplib::Request& req, httplib::Response& res) {
      const HttpResponse r = handle(method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
  };
  server->Get(".*", route("GET"));
  server->Post(".*", route("POST"));
  server->Options(".*", route("OPTIONS"));
  if (!server->listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

void Service::stop() { std::static_pointer_cast<httplib::Server>(server_)->stop(); }

void Service::wait_until_ready() const
{
  auto server = std::static_pointer_cast<httplib::Server>(server_);
  while (!server->is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(5));
}

}  // namespace accessplan
