#include "accessplan/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "accessplan/errors.hpp"

namespace accessplan {

using nlohmann::json;

namespace {

/// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& doc, std::string where) : doc_(doc), where_(std::move(where))
  {
    if (!doc_.is_object()) throw ValidationError(where_ + " must be a JSON object");
  }

  bool has(const std::string& key)
  {
    known_.insert(key);
    return doc_.contains(key) && !doc_.at(key).is_null();
  }

  const json& at(const std::string& key) { return doc_.at(key); }

  double number(const std::string& key, double fallback)
  {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_number()) throw ValidationError(where_ + "." + key + " must be a number");
    return v.get<double>();
  }

  std::string text(const std::string& key, const std::string& fallback)
  {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_string()) throw ValidationError(where_ + "." + key + " must be a string");
    return v.get<std::string>();
  }

  bool flag(const std::string& key, bool fallback)
  {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_boolean()) throw ValidationError(where_ + "." + key + " must be true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback)
  {
    if (!has(key)) return fallback;
    return number_array(doc_.at(key), where_ + "." + key);
  }

  static std::vector<double> number_array(const json& v, const std::string& where)
  {
    if (!v.is_array()) throw ValidationError(where + " must be an array of numbers");
    std::vector<double> out;
    for (const json& x : v) {
      if (!x.is_number()) throw ValidationError(where + " must be an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  void finish() const
  {
    std::vector<std::string> unknown;
    for (const auto& [key, value] : doc_.items()) {
      if (!known_.contains(key)) unknown.push_back(where_ + "." + key);
    }
    if (!unknown.empty()) throw ValidationError("unknown configuration keys", unknown);
  }

 private:
  const json& doc_;
  std::string where_;
  std::set<std::string> known_;
};

UseVector use_vector(const json& v, const std::string& where)
{
  if (!v.is_object()) throw ValidationError(where + " must map land-use codes to numbers");
  std::map<std::string, double> by_code;
  for (const auto& [code, value] : v.items()) {
    if (!value.is_number()) throw ValidationError(where + "." + code + " must be a number");
    by_code[code] = value.get<double>();
  }
  return parse_use_vector(by_code);
}

json use_vector_json(const UseVector& v)
{
  json out = json::object();
  for (Use u : kAllUses) out[std::string(1, use_code(u))] = v[index_of(u)];
  return out;
}

std::map<Tier, double> tier_map(const json& v, const std::string& where)
{
  if (!v.is_object()) throw ValidationError(where + " must map tier names to numbers");
  std::map<Tier, double> out;
  for (const auto& [name, value] : v.items()) {
    if (!value.is_number()) throw ValidationError(where + "." + name + " must be a number");
    out[parse_tier(name)] = value.get<double>();
  }
  return out;
}

json tier_map_json(const std::map<Tier, double>& m)
{
  json out = json::object();
  for (const auto& [tier, value] : m) out[tier_name(tier)] = value;
  return out;
}

Range parse_range(const json& v, const std::string& where)
{
  ObjectReader r(v, where);
  Range range;
  if (r.has("grid")) {
    range.grid = ObjectReader::number_array(r.at("grid"), where + ".grid");
    if (range.grid.empty()) throw ValidationError(where + ".grid must not be empty");
  } else {
    range.lo = r.number("lo", range.lo);
    range.hi = r.number("hi", range.hi);
  }
  r.finish();
  return range;
}

json range_json(const Range& r)
{
  if (r.discrete()) return json{{"grid", r.grid}};
  return json{{"lo", r.lo}, {"hi", r.hi}};
}

void read_policy_fields(ObjectReader& r, Policy& p, const std::string& where)
{
  if (r.has("tiers")) {
    const json& t = r.at("tiers");
    if (!t.is_array()) throw ValidationError(where + ".tiers must be an array of tier names");
    p.tiers.clear();
    for (const json& name : t) {
      if (!name.is_string()) throw ValidationError(where + ".tiers must be an array of tier names");
      p.tiers.push_back(parse_tier(name.get<std::string>()));
    }
  }
  p.radii = r.numbers("radii", p.radii);
  p.sigma = r.numbers("sigma", p.sigma);
  p.rho = r.numbers("rho", p.rho);
  if (r.has("shares")) p.shares = use_vector(r.at("shares"), where + ".shares");
  if (r.has("construction_shares")) {
    p.construction_shares = use_vector(r.at("construction_shares"), where + ".construction_shares");
  }
  if (r.has("priority")) {
    const json& v = r.at("priority");
    if (v.is_string()) {
      p.priority = parse_priority(v.get<std::string>());
    } else if (v.is_array()) {
      std::vector<std::string> codes;
      for (const json& c : v) {
        if (!c.is_string()) throw ValidationError(where + ".priority must list land-use codes");
        codes.push_back(c.get<std::string>());
      }
      p.priority = parse_priority(codes);
    } else {
      throw ValidationError(where + ".priority must be a string like \"FBEGARIT\"");
    }
  }
  p.b_total = r.number("b_total", p.b_total);
}

}  // namespace

RunConfig default_run_config()
{
  RunConfig c;
  c.policy.shares = default_land_use_shares();
  c.policy.construction_shares = default_construction_shares();
  c.space = default_policy_space(c.policy);
  return c;
}

json policy_to_json(const Policy& p)
{
  json tiers = json::array();
  for (Tier t : p.tiers) tiers.push_back(tier_name(t));
  return json{{"tiers", tiers},
              {"radii", p.radii},
              {"sigma", p.sigma},
              {"rho", p.rho},
              {"shares", use_vector_json(p.shares)},
              {"construction_shares", use_vector_json(p.construction_shares)},
              {"priority", priority_string(p.priority)},
              {"b_total", p.b_total}};
}

Policy policy_from_json(const json& doc, const Policy& base)
{
  try {
    ObjectReader r(doc, "policy");
    Policy p = base;
    read_policy_fields(r, p, "policy");
    if (r.has("params")) {
      const json& params = r.at("params");
      if (!params.is_object()) throw ValidationError("policy.params must map parameter names to numbers");
      std::vector<std::pair<std::string, double>> named;
      for (const auto& [name, value] : params.items()) {
        if (!value.is_number()) throw ValidationError("policy.params." + name + " must be a number");
        named.emplace_back(name, value.get<double>());
      }
      p.apply_parameters(named);
    }
    r.finish();
    return p;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed policy: ") + e.what());
  }
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir)
{
  try {
    RunConfig c = default_run_config();
    ObjectReader top(doc, "config");
    auto resolve = [&](const std::string& p) -> std::filesystem::path {
      if (p.empty()) return {};
      std::filesystem::path path(p);
      return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    c.network = resolve(top.text("network", ""));
    c.blocks = resolve(top.text("blocks", ""));
    if (c.network.empty() != c.blocks.empty()) throw ValidationError("config needs both network and blocks paths, or neither");
    c.snap_tolerance = top.number("snap_tolerance", c.snap_tolerance);
    c.buffer = top.number("buffer", c.buffer);
    if (!(c.snap_tolerance >= 0.0)) throw ValidationError("snap tolerance must be non-negative");
    if (!(c.buffer >= 0.0)) throw ValidationError("adjacency buffer must be non-negative");

    if (top.has("policy")) {
      ObjectReader r(top.at("policy"), "policy");
      read_policy_fields(r, c.policy, "policy");
      r.finish();
    }
    c.policy.validate();

    EvaluationSettings& s = c.settings;
    if (top.has("settings")) {
      ObjectReader r(top.at("settings"), "settings");
      s.centrality.choice_cost = parse_cost(r.text("choice_cost", to_string(s.centrality.choice_cost)));
      s.centrality.integration_cost = parse_cost(r.text("integration_cost", to_string(s.centrality.integration_cost)));
      const std::string agg = r.text("aggregation", "max");
      if (agg == "max") {
        s.aggregation = BlockAggregation::max;
      } else if (agg == "frontage_weighted") {
        s.aggregation = BlockAggregation::frontage_weighted;
      } else {
        throw ValidationError("settings.aggregation must be max or frontage_weighted");
      }
      s.cluster_thresholds = r.numbers("cluster_thresholds", s.cluster_thresholds);
      if (r.has("rank")) s.rank_overrides = tier_map(r.at("rank"), "settings.rank");
      if (r.has("min_parcel")) s.min_parcel_overrides = tier_map(r.at("min_parcel"), "settings.min_parcel");
      s.tau_int = r.number("tau_int", s.tau_int);
      s.accounting = parse_accounting(r.text("accounting", to_string(s.accounting)));
      s.far_anchor = r.number("far_anchor", s.far_anchor);
      s.footprint_ratio = r.number("footprint_ratio", s.footprint_ratio);
      if (r.has("footprint_by_use")) s.footprint_by_use = use_vector(r.at("footprint_by_use"), "settings.footprint_by_use");
      s.storey_height = r.number("storey_height", s.storey_height);
      s.fit = parse_fit_mode(r.text("fit", to_string(s.fit)));
      s.r0 = r.number("r0", s.r0);
      const double threads = r.number("threads", 0.0);
      if (!(threads >= 0.0) || threads != std::floor(threads)) throw ValidationError("settings.threads must be a whole number");
      s.threads = static_cast<unsigned>(threads);
      r.finish();
    }
    s.validate();
    if (!s.cluster_thresholds.empty() && s.cluster_thresholds.size() != c.policy.tiers.size()) {
      throw ValidationError("one cluster threshold per tier is required");
    }

    c.space = default_policy_space(c.policy);
    if (top.has("sampling")) {
      ObjectReader r(top.at("sampling"), "sampling");
      const double n = r.number("n", static_cast<double>(c.sampling.n));
      if (!(n >= 1.0) || n != std::floor(n)) throw ValidationError("sampling.n must be a positive whole number");
      c.sampling.n = static_cast<std::size_t>(n);
      if (r.has("seed")) {
        const json& seed = r.at("seed");
        if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
          throw ValidationError("sampling.seed must be a non-negative integer");
        }
        c.sampling.seed = seed.get<std::uint64_t>();
      }
      if (r.has("radius")) {
        const json& v = r.at("radius");
        if (!v.is_array()) throw ValidationError("sampling.radius must list one range per tier");
        c.space.radius.clear();
        for (std::size_t k = 0; k < v.size(); ++k) {
          c.space.radius.push_back(parse_range(v[k], "sampling.radius[" + std::to_string(k) + "]"));
        }
      }
      if (r.has("sigma")) c.space.sigma = parse_range(r.at("sigma"), "sampling.sigma");
      if (r.has("rho")) c.space.rho = parse_range(r.at("rho"), "sampling.rho");
      c.space.sample_shares = r.flag("sample_shares", false);
      c.space.sample_priority = r.flag("sample_priority", false);
      r.finish();
    }
    c.space.validate();
    top.finish();
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed configuration: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  RunConfig c = parse_config(doc, path.parent_path());
  for (const auto& p : {c.network, c.blocks}) {
    if (!p.empty() && !std::filesystem::exists(p)) throw ValidationError("input file not found: " + p.string());
  }
  return c;
}

json to_json(const RunConfig& c)
{
  const EvaluationSettings& s = c.settings;
  json radius = json::array();
  for (const Range& r : c.space.radius) radius.push_back(range_json(r));
  return json{
      {"network", c.network.string()},
      {"blocks", c.blocks.string()},
      {"snap_tolerance", c.snap_tolerance},
      {"buffer", c.buffer},
      {"policy", policy_to_json(c.policy)},
      {"settings",
       {{"choice_cost", to_string(s.centrality.choice_cost)},
        {"integration_cost", to_string(s.centrality.integration_cost)},
        {"aggregation", s.aggregation == BlockAggregation::max ? "max" : "frontage_weighted"},
        {"cluster_thresholds", s.cluster_thresholds},
        {"rank", tier_map_json(s.rank_overrides)},
        {"min_parcel", tier_map_json(s.min_parcel_overrides)},
        {"tau_int", s.tau_int},
        {"accounting", to_string(s.accounting)},
        {"far_anchor", s.far_anchor},
        {"footprint_ratio", s.footprint_ratio},
        {"footprint_by_use", use_vector_json(s.footprint_by_use)},
        {"storey_height", s.storey_height},
        {"fit", to_string(s.fit)},
        {"r0", s.r0},
        {"threads", s.threads}}},
      {"sampling",
       {{"n", c.sampling.n},
        {"seed", c.sampling.seed},
        {"radius", radius},
        {"sigma", range_json(c.space.sigma)},
        {"rho", range_json(c.space.rho)},
        {"sample_shares", c.space.sample_shares},
        {"sample_priority", c.space.sample_priority}}},
  };
}

std::string sha256_hex(const std::string& bytes)
{
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

std::string file_sha256(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

std::string config_hash(const RunConfig& config)
{
  json doc = to_json(config);
  doc["settings"].erase("threads");
  return sha256_hex(doc.dump());
}

}  // namespace accessplan
