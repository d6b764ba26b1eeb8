#include "accessplan/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "accessplan/errors.hpp"

namespace accessplan {

namespace {

double u01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t below(std::mt19937_64& rng, std::size_t bound)
{
  const auto k = static_cast<std::size_t>(u01(rng) * static_cast<double>(bound));
  return std::min(k, bound - 1);
}

bool close_to_one(double sum) { return std::abs(sum - 1.0) <= 1e-6; }

std::string format_value(double v)
{
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

UseVector default_land_use_shares()
{
  UseVector s{};
  s[index_of(Use::F)] = 0.058;
  s[index_of(Use::B)] = 0.174;
  s[index_of(Use::E)] = 0.047;
  s[index_of(Use::G)] = 0.065;
  s[index_of(Use::A)] = 0.059;
  s[index_of(Use::R)] = 0.333;
  s[index_of(Use::I)] = 0.19;
  s[index_of(Use::T)] = 0.074;
  return s;
}

UseVector default_construction_shares()
{
  UseVector g{};
  g[index_of(Use::A)] = 0.10;
  g[index_of(Use::B)] = 0.25;
  g[index_of(Use::G)] = 0.0;
  g[index_of(Use::I)] = 0.05;
  g[index_of(Use::T)] = 0.05;
  g[index_of(Use::R)] = 0.35;
  g[index_of(Use::E)] = 0.10;
  g[index_of(Use::F)] = 0.10;
  return g;
}

void Policy::validate() const
{
  std::vector<std::string> problems;
  const std::size_t n = tiers.size();
  if (n == 0) problems.push_back("at least one tier is required");
  if (radii.size() != n) problems.push_back("one radius per tier is required");
  if (sigma.size() != n) problems.push_back("one choice weight per tier is required");
  if (rho.size() != n) problems.push_back("one accessibility tier weight per tier is required");
  std::set<Tier> seen_tiers(tiers.begin(), tiers.end());
  if (seen_tiers.size() != n) problems.push_back("tiers must be distinct");
  for (std::size_t l = 0; l < radii.size(); ++l) {
    if (!(radii[l] > 0.0) || !std::isfinite(radii[l])) {
      problems.push_back("radius " + std::to_string(l) + " must be positive and finite");
    } else if (l > 0 && !(radii[l] < radii[l - 1])) {
      problems.push_back("radii must decrease strictly from coarse to fine tiers");
    }
  }
  for (double s : sigma) {
    if (!(s >= 0.0 && s <= 1.0)) problems.push_back("choice weights must lie in [0, 1]");
  }
  double rho_sum = 0.0;
  for (double w : rho) {
    if (!(w >= 0.0) || !std::isfinite(w)) problems.push_back("accessibility tier weights must be non-negative");
    rho_sum += w;
  }
  if (!rho.empty() && !(rho_sum > 0.0)) problems.push_back("accessibility tier weights must not all be zero");
  auto check_shares = [&](const UseVector& v, const char* what) {
    double sum = 0.0;
    for (double x : v) {
      if (!(x >= 0.0)) problems.push_back(std::string(what) + " must be non-negative");
      sum += x;
    }
    if (!close_to_one(sum)) problems.push_back(std::string(what) + " must sum to 1");
  };
  check_shares(shares, "land-use shares");
  check_shares(construction_shares, "construction shares");
  if (!(b_total > 0.0) || !std::isfinite(b_total)) problems.push_back("total construction target must be positive");
  std::array<bool, kUseCount> seen{};
  for (Use u : priority) seen[index_of(u)] = true;
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    problems.push_back("priority order must be a permutation of all eight uses");
  }
  if (!problems.empty()) throw ValidationError("invalid policy", problems);
}

std::vector<std::pair<std::string, double>> Policy::parameters() const
{
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t l = 0; l < tiers.size() && l < radii.size(); ++l) out.emplace_back(tier_label(tiers[l]) + "Radius", radii[l]);
  for (std::size_t l = 0; l < sigma.size(); ++l) out.emplace_back("ChoiceWeight" + std::to_string(l), sigma[l]);
  for (std::size_t l = 0; l < rho.size(); ++l) out.emplace_back("AccTierWeight" + std::to_string(l), rho[l]);
  for (Use u : kAllUses) out.emplace_back(std::string("Share_") + use_code(u), shares[index_of(u)]);
  for (Use u : kAllUses) {
    out.emplace_back(std::string("ConstructionShare_") + use_code(u), construction_shares[index_of(u)]);
  }
  out.emplace_back("BTotal", b_total);
  return out;
}

void Policy::apply_parameters(std::span<const std::pair<std::string, double>> params)
{
  auto indexed = [](const std::string& name, const std::string& prefix, std::size_t size) -> std::optional<std::size_t> {
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    const std::string rest = name.substr(prefix.size());
    if (rest.empty() || !std::all_of(rest.begin(), rest.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return std::nullopt;
    }
    const std::size_t k = std::stoul(rest);
    if (k >= size) return std::nullopt;
    return k;
  };
  for (const auto& [name, value] : params) {
    bool matched = false;
    for (std::size_t l = 0; l < tiers.size() && l < radii.size(); ++l) {
      if (name == tier_label(tiers[l]) + "Radius") {
        radii[l] = value;
        matched = true;
      }
    }
    if (auto k = indexed(name, "ChoiceWeight", sigma.size())) {
      sigma[*k] = value;
      matched = true;
    } else if (auto k2 = indexed(name, "AccTierWeight", rho.size())) {
      rho[*k2] = value;
      matched = true;
    } else if (name.rfind("Share_", 0) == 0 && name.size() == 7) {
      shares[index_of(parse_use(name.substr(6)))] = value;
      matched = true;
    } else if (name.rfind("ConstructionShare_", 0) == 0 && name.size() == 19) {
      construction_shares[index_of(parse_use(name.substr(18)))] = value;
      matched = true;
    } else if (name == "BTotal") {
      b_total = value;
      matched = true;
    }
    if (!matched) throw ValidationError("unknown policy parameter '" + name + "'");
  }
}

double Range::map(double u) const
{
  if (discrete()) return grid[std::min(static_cast<std::size_t>(u * static_cast<double>(grid.size())), grid.size() - 1)];
  return lo + u * (hi - lo);
}

void PolicySpace::validate() const
{
  baseline.validate();
  if (radius.size() != baseline.tiers.size()) throw ValidationError("one radius range per tier is required");
  auto check = [](const Range& r, const std::string& what) {
    if (r.discrete()) {
      for (double v : r.grid) {
        if (!std::isfinite(v)) throw ValidationError(what + " grid values must be finite");
      }
    } else if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
      throw ValidationError(what + " range needs finite bounds with lower <= upper");
    }
  };
  for (const Range& r : radius) {
    check(r, "radius");
    const double low = r.discrete() ? *std::min_element(r.grid.begin(), r.grid.end()) : r.lo;
    if (!(low > 0.0)) throw ValidationError("radius ranges must be positive");
  }
  check(sigma, "choice weight");
  check(rho, "accessibility tier weight");
  auto in_unit = [](const Range& r) {
    if (r.discrete()) return std::all_of(r.grid.begin(), r.grid.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
    return r.lo >= 0.0 && r.hi <= 1.0;
  };
  if (!in_unit(sigma)) throw ValidationError("choice weight range must lie within [0, 1]");
  if (!in_unit(rho)) throw ValidationError("accessibility tier weight range must lie within [0, 1]");
}

std::size_t PolicySpace::dimensions() const
{
  const std::size_t tiers = baseline.tiers.size();
  return 3 * tiers + (sample_shares ? kUseCount : 0) + (sample_priority ? kUseCount : 0);
}

PolicySpace default_policy_space(const Policy& baseline)
{
  PolicySpace space;
  space.baseline = baseline;
  for (Tier t : baseline.tiers) {
    Range r;
    switch (t) {
      case Tier::district: r.grid = {1200.0, 1400.0, 1600.0}; break;
      case Tier::community_cluster: r.grid = {600.0, 700.0, 800.0, 900.0}; break;
      case Tier::community: r.grid = {250.0, 300.0, 350.0, 400.0}; break;
      case Tier::city: r.grid = {2000.0, 2400.0, 2800.0}; break;
      case Tier::life_circle: r.grid = {900.0, 1000.0, 1100.0, 1200.0}; break;
    }
    space.radius.push_back(r);
  }
  return space;
}

std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::size_t dims, std::uint64_t seed)
{
  if (n == 0) throw ValidationError("sample size must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> out(n, std::vector<double>(dims, 0.0));
  std::vector<std::size_t> perm(n);
  for (std::size_t d = 0; d < dims; ++d) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[below(rng, i)]);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (static_cast<double>(perm[i]) + u01(rng)) / static_cast<double>(n);
      out[i][d] = std::min(u, std::nextafter(1.0, 0.0));
    }
  }
  return out;
}

std::vector<Policy> sample_policies(const PolicySpace& space, std::size_t n, std::uint64_t seed)
{
  space.validate();
  const std::size_t dims = space.dimensions();
  if (dims == 0) throw ValidationError("policy space has no dimensions");
  const auto u = latin_hypercube(n, dims, seed);
  const std::size_t tiers = space.baseline.tiers.size();

  std::vector<Policy> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Policy p = space.baseline;
    std::size_t d = 0;
    for (std::size_t l = 0; l < tiers; ++l) p.radii[l] = space.radius[l].map(u[i][d++]);
    for (std::size_t l = 0; l < tiers; ++l) p.sigma[l] = space.sigma.map(u[i][d++]);
    double rho_sum = 0.0;
    for (std::size_t l = 0; l < tiers; ++l) {
      p.rho[l] = space.rho.map(u[i][d++]);
      rho_sum += p.rho[l];
    }
    for (double& w : p.rho) w = rho_sum > 0.0 ? w / rho_sum : 1.0 / static_cast<double>(tiers);
    if (space.sample_shares) {
      double sum = 0.0;
      for (std::size_t k = 0; k < kUseCount; ++k) {
        p.shares[k] = u[i][d++];
        sum += p.shares[k];
      }
      for (double& s : p.shares) s = sum > 0.0 ? s / sum : 1.0 / static_cast<double>(kUseCount);
    }
    if (space.sample_priority) {
      std::array<std::pair<double, Use>, kUseCount> keys{};
      for (std::size_t k = 0; k < kUseCount; ++k) keys[k] = {u[i][d++], space.baseline.priority[k]};
      std::stable_sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      for (std::size_t k = 0; k < kUseCount; ++k) p.priority[k] = keys[k].second;
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::optional<double> ObjectiveRecord::param(const std::string& name) const
{
  for (const auto& [key, value] : params) {
    if (key == name) return value;
  }
  return std::nullopt;
}

double accessibility_utility(std::span<const Lot> lots, std::span<const double> far)
{
  if (lots.size() != far.size()) throw ValidationError("FAR values must align with lots");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < lots.size(); ++i) {
    const double w = far[i] * lots[i].area;
    den += w;
    if (!is_bad(lots[i].use)) num += w * lots[i].access;
  }
  if (!(den > 0.0)) throw InfeasibleError("no built floor area; accessibility utility is undefined");
  return std::clamp(num / den, 0.0, 1.0);
}

double jobs_housing_penalty(const UseVector& land_areas, double r0)
{
  const double housing = land_areas[index_of(Use::R)];
  if (!(housing > 0.0)) throw InfeasibleError("no residential land; jobs-housing ratio is undefined");
  const double jobs = land_areas[index_of(Use::B)] + land_areas[index_of(Use::F)];
  const double d = jobs / housing - r0;
  return d * d;
}

void normalize_objectives(std::span<ObjectiveRecord> records)
{
  std::vector<ObjectiveRecord*> valid;
  for (ObjectiveRecord& r : records) {
    r.norm = NormalizedObjectives{};
    if (r.valid) valid.push_back(&r);
  }
  if (valid.size() < 2) return;

  auto normalize = [&](auto get, auto set) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const ObjectiveRecord* r : valid) {
      lo = std::min(lo, get(*r));
      hi = std::max(hi, get(*r));
    }
    const double span = hi - lo;
    for (ObjectiveRecord* r : valid) set(*r, span > 0.0 ? std::clamp((get(*r) - lo) / span, 0.0, 1.0) : 0.0);
  };
  normalize([](const ObjectiveRecord& r) { return 1.0 - r.raw.au; },
            [](ObjectiveRecord& r, double v) { r.norm.one_minus_au = v; });
  normalize([](const ObjectiveRecord& r) { return r.raw.d_b; }, [](ObjectiveRecord& r, double v) { r.norm.d_b = v; });
  normalize([](const ObjectiveRecord& r) { return r.raw.d_lu; }, [](ObjectiveRecord& r, double v) { r.norm.d_lu = v; });
  normalize([](const ObjectiveRecord& r) { return r.raw.d_cs; }, [](ObjectiveRecord& r, double v) { r.norm.d_cs = v; });
  normalize([](const ObjectiveRecord& r) { return r.raw.jh_pen; },
            [](ObjectiveRecord& r, double v) { r.norm.jh_pen = v; });
  for (ObjectiveRecord* r : valid) r->norm.d_total_sum = r->norm.d_b + r->norm.d_lu + r->norm.d_cs;
  normalize([](const ObjectiveRecord& r) { return r.norm.d_total_sum; },
            [](ObjectiveRecord& r, double v) { r.norm.d_total = v; });
}

bool dominates(std::span<const double> a, std::span<const double> b)
{
  bool strict = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > b[k]) return false;
    if (a[k] < b[k]) strict = true;
  }
  return strict;
}

std::vector<std::size_t> pareto_front(std::span<const std::vector<double>> points)
{
  // Lexicographic sweep: a dominator always precedes the points it dominates.
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a] != points[b]) return points[a] < points[b];
    return a < b;
  });
  std::vector<std::size_t> front;
  for (std::size_t i : order) {
    const bool dominated = std::any_of(front.begin(), front.end(), [&](std::size_t f) { return dominates(points[f], points[i]); });
    if (!dominated) front.push_back(i);
  }
  std::sort(front.begin(), front.end());
  return front;
}

std::vector<std::size_t> pareto_front(std::span<const ObjectiveRecord> records)
{
  std::vector<std::vector<double>> points;
  std::vector<std::size_t> ids;
  for (const ObjectiveRecord& r : records) {
    if (!r.valid) continue;
    const auto o = r.objectives();
    points.emplace_back(o.begin(), o.end());
    ids.push_back(r.id);
  }
  std::vector<std::size_t> out;
  for (std::size_t k : pareto_front(points)) out.push_back(ids[k]);
  std::sort(out.begin(), out.end());
  return out;
}

KneeResult knee_point(std::span<const KneeCandidate> front)
{
  if (front.empty()) throw ValidationError("knee selection needs a nonempty front");
  const std::size_t dims = front.front().objectives.size();
  for (const KneeCandidate& c : front) {
    if (c.objectives.size() != dims) throw ValidationError("front points must share one objective count");
  }
  std::vector<double> lo(dims, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dims, -std::numeric_limits<double>::infinity());
  for (const KneeCandidate& c : front) {
    for (std::size_t k = 0; k < dims; ++k) {
      lo[k] = std::min(lo[k], c.objectives[k]);
      hi[k] = std::max(hi[k], c.objectives[k]);
    }
  }
  KneeResult r;
  r.distances.resize(front.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < front.size(); ++i) {
    double sq = 0.0;
    for (std::size_t k = 0; k < dims; ++k) {
      const double span = hi[k] - lo[k];
      const double m = span > 0.0 ? (front[i].objectives[k] - lo[k]) / span : 0.0;
      sq += m * m;
    }
    r.distances[i] = std::sqrt(sq);
    best = std::min(best, r.distances[i]);
  }
  constexpr double kTieTolerance = 1e-12;
  std::size_t pick = front.size();
  for (std::size_t i = 0; i < front.size(); ++i) {
    if (r.distances[i] > best + kTieTolerance) continue;
    if (pick == front.size()) {
      pick = i;
      continue;
    }
    const KneeCandidate& a = front[i];
    const KneeCandidate& b = front[pick];
    if (std::tie(a.d_cs, a.d_lu, a.id) < std::tie(b.d_cs, b.d_lu, b.id)) pick = i;
  }
  r.id = front[pick].id;
  r.distance = r.distances[pick];
  return r;
}

namespace {

std::unordered_map<std::size_t, const ObjectiveRecord*> index_records(std::span<const ObjectiveRecord> records)
{
  std::unordered_map<std::size_t, const ObjectiveRecord*> by_id;
  for (const ObjectiveRecord& r : records) by_id[r.id] = &r;
  return by_id;
}

const ObjectiveRecord& lookup(const std::unordered_map<std::size_t, const ObjectiveRecord*>& by_id, std::size_t id)
{
  auto it = by_id.find(id);
  if (it == by_id.end()) throw ValidationError("unknown record id " + std::to_string(id));
  return *it->second;
}

std::array<double, 6> metrics(const ObjectiveRecord& r)
{
  return {r.norm.one_minus_au, r.norm.d_b, r.norm.d_lu, r.norm.d_cs, r.norm.d_total, r.norm.jh_pen};
}

std::vector<double> average_ranks(std::span<const double> v)
{
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

KneeResult knee_point(std::span<const ObjectiveRecord> records, std::span<const std::size_t> front_ids)
{
  const auto by_id = index_records(records);
  std::vector<KneeCandidate> candidates;
  for (std::size_t id : front_ids) {
    const ObjectiveRecord& r = lookup(by_id, id);
    const auto o = r.objectives();
    candidates.push_back({id, {o.begin(), o.end()}, r.raw.d_cs, r.raw.d_lu});
  }
  return knee_point(candidates);
}

std::optional<double> spearman(std::span<const double> a, std::span<const double> b)
{
  if (a.size() != b.size()) throw ValidationError("rank correlation needs equal-length columns");
  if (a.size() < 2) return std::nullopt;
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

SpearmanMatrix rank_correlations(std::span<const ObjectiveRecord> records, std::span<const std::size_t> ids)
{
  const auto by_id = index_records(records);
  std::vector<std::array<double, 6>> rows;
  for (std::size_t id : ids) {
    const ObjectiveRecord& r = lookup(by_id, id);
    if (r.valid) rows.push_back(metrics(r));
  }
  if (rows.size() < 3) throw ValidationError("rank correlations need at least three valid records");
  SpearmanMatrix m;
  m.names.assign(kMetricNames.begin(), kMetricNames.end());
  std::array<std::vector<double>, 6> cols;
  for (std::size_t k = 0; k < 6; ++k) {
    for (const auto& row : rows) cols[k].push_back(row[k]);
  }
  m.rho.assign(6, std::vector<std::optional<double>>(6));
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t b = 0; b < 6; ++b) m.rho[a][b] = spearman(cols[a], cols[b]);
  }
  return m;
}

Quartiles quartiles(std::vector<double> values)
{
  if (values.empty()) throw ValidationError("quartiles need at least one value");
  std::sort(values.begin(), values.end());
  auto at = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

SensitivityReport sensitivity_groups(std::span<const ObjectiveRecord> records, std::span<const std::size_t> ids,
                                     const std::string& parameter)
{
  const auto by_id = index_records(records);
  std::set<double> grid;
  for (const ObjectiveRecord& r : records) {
    if (!r.valid) continue;
    auto v = r.param(parameter);
    if (!v) throw ValidationError("records do not carry parameter '" + parameter + "'");
    grid.insert(*v);
  }
  std::map<double, std::array<std::vector<double>, 3>> groups;
  for (std::size_t id : ids) {
    const ObjectiveRecord& r = lookup(by_id, id);
    if (!r.valid) continue;
    auto v = r.param(parameter);
    if (!v) throw ValidationError("records do not carry parameter '" + parameter + "'");
    const auto o = r.objectives();
    for (std::size_t k = 0; k < 3; ++k) groups[*v][k].push_back(o[k]);
  }
  SensitivityReport report;
  report.parameter = parameter;
  for (const auto& [value, cols] : groups) {
    SensitivityGroup g;
    g.value = value;
    g.count = cols[0].size();
    for (std::size_t k = 0; k < 3; ++k) g.objectives[k] = quartiles(cols[k]);
    report.groups.push_back(g);
  }
  for (double v : grid) {
    if (!groups.contains(v)) {
      report.notes.push_back(parameter + "=" + format_value(v) + " has no records in the selected set; group omitted");
    }
  }
  return report;
}

std::vector<std::string> discrete_parameters(std::span<const ObjectiveRecord> records, std::size_t max_levels)
{
  std::vector<std::string> names;
  std::map<std::string, std::set<double>> levels;
  std::size_t valid = 0;
  for (const ObjectiveRecord& r : records) {
    if (!r.valid) continue;
    ++valid;
    for (const auto& [name, value] : r.params) {
      if (!levels.contains(name)) names.push_back(name);
      levels[name].insert(value);
    }
  }
  std::vector<std::string> out;
  for (const std::string& name : names) {
    const std::size_t k = levels[name].size();
    if (k >= 2 && k <= max_levels && k < valid) out.push_back(name);
  }
  return out;
}

}  // namespace accessplan
