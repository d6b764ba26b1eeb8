#include "accessplan/landuse.hpp"

#include <algorithm>

#include "accessplan/errors.hpp"

namespace accessplan {

char use_code(Use u)
{
  static constexpr char codes[] = {'R', 'A', 'G', 'B', 'I', 'T', 'E', 'F'};
  return codes[index_of(u)];
}

Use parse_use(const std::string& code)
{
  if (code.size() == 1) {
    for (Use u : kAllUses) {
      if (use_code(u) == code[0]) return u;
    }
  }
  throw ValidationError("unknown land use '" + code + "' (expected one of R A G B I T E F)");
}

PriorityOrder parse_priority(std::span<const std::string> codes)
{
  if (codes.size() != kUseCount) throw ValidationError("priority order must list all eight land uses");
  PriorityOrder order{};
  std::array<bool, kUseCount> seen{};
  for (std::size_t k = 0; k < kUseCount; ++k) {
    const Use u = parse_use(codes[k]);
    if (seen[index_of(u)]) throw ValidationError("priority order repeats use '" + codes[k] + "'");
    seen[index_of(u)] = true;
    order[k] = u;
  }
  return order;
}

PriorityOrder parse_priority(const std::string& compact)
{
  std::vector<std::string> codes;
  for (char c : compact) {
    if (c == ' ' || c == ',' || c == '>') continue;
    codes.emplace_back(1, c);
  }
  return parse_priority(codes);
}

std::string priority_string(const PriorityOrder& order)
{
  std::string out;
  for (Use u : order) out.push_back(use_code(u));
  return out;
}

UseVector parse_use_vector(const std::map<std::string, double>& by_code)
{
  UseVector v{};
  for (const auto& [code, value] : by_code) v[index_of(parse_use(code))] = value;
  return v;
}

const char* tier_name(Tier t)
{
  switch (t) {
    case Tier::city: return "city";
    case Tier::district: return "district";
    case Tier::life_circle: return "life_circle";
    case Tier::community_cluster: return "community_cluster";
    case Tier::community: return "community";
  }
  return "?";
}

Tier parse_tier(const std::string& name)
{
  for (Tier t : {Tier::city, Tier::district, Tier::life_circle, Tier::community_cluster, Tier::community}) {
    if (name == tier_name(t)) return t;
  }
  throw ValidationError("unknown tier '" + name +
                        "' (expected city, district, life_circle, community_cluster or community)");
}

std::string tier_label(Tier t)
{
  switch (t) {
    case Tier::city: return "City";
    case Tier::district: return "District";
    case Tier::life_circle: return "LifeCircle";
    case Tier::community_cluster: return "CommunityCluster";
    case Tier::community: return "Community";
  }
  return "?";
}

double default_rank(Tier t)
{
  switch (t) {
    case Tier::city: return 12.0;
    case Tier::district: return 11.0;
    case Tier::life_circle: return 10.0;
    case Tier::community_cluster: return 9.0;
    case Tier::community: return 8.0;
  }
  return 0.0;
}

double default_min_parcel(Tier t)
{
  switch (t) {
    case Tier::city:
    case Tier::district: return 2500.0;
    case Tier::life_circle: return 2000.0;
    case Tier::community_cluster: return 1000.0;
    case Tier::community: return 500.0;
  }
  return 0.0;
}

std::vector<double> level_pct(std::span<const Tier> active, const std::map<Tier, double>& rank_overrides)
{
  if (active.empty()) throw ValidationError("at least one active tier is required");
  std::vector<double> w;
  w.reserve(active.size());
  double total = 0.0;
  for (Tier t : active) {
    const auto it = rank_overrides.find(t);
    const double rank = it != rank_overrides.end() ? it->second : default_rank(t);
    if (!(rank > 0.0)) throw ValidationError(std::string("tier rank must be positive for ") + tier_name(t));
    w.push_back(rank);
    total += rank;
  }
  for (double& x : w) x /= total;
  return w;
}

}  // namespace accessplan
