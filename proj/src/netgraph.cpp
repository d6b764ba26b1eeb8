#include "accessplan/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <queue>
#include <sstream>

#include "accessplan/errors.hpp"
#include "accessplan/parallel.hpp"

namespace accessplan {

const char* to_string(CentralityKind kind) { return kind == CentralityKind::choice ? "choice" : "integration"; }

const char* to_string(CostKind cost) { return cost == CostKind::metric ? "metric" : "angular"; }

CostKind parse_cost(const std::string& text)
{
  if (text == "metric") return CostKind::metric;
  if (text == "angular") return CostKind::angular;
  throw ValidationError("unknown cost kind '" + text + "' (expected metric or angular)");
}

void StreetNetwork::validate(double snap_tolerance) const
{
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const StreetSegment& s = segments[i];
    std::ostringstream where;
    where << "segment " << s.id << ": ";
    if (!(s.length > 0.0) || !std::isfinite(s.length)) problems.push_back(where.str() + "length must be positive");
    if (s.from >= nodes.size() || s.to >= nodes.size()) {
      problems.push_back(where.str() + "endpoint node id out of range");
      continue;
    }
    if (s.geometry.size() < 2) {
      problems.push_back(where.str() + "geometry needs at least two vertices");
      continue;
    }
    if (distance(s.geometry.front(), nodes[s.from]) > snap_tolerance ||
        distance(s.geometry.back(), nodes[s.to]) > snap_tolerance) {
      problems.push_back(where.str() + "geometry endpoints do not match node coordinates");
    }
  }
  if (!problems.empty()) throw ValidationError("invalid street network", std::move(problems));
}

SegmentGraph::SegmentGraph(std::vector<std::int64_t> ids, std::span<const Edge> edges)
    : ids_(std::move(ids)), adjacency_(ids_.size())
{
  for (const Edge& e : edges) {
    if (e.a >= ids_.size() || e.b >= ids_.size()) throw ValidationError("segment graph edge endpoint out of range");
    if (e.a == e.b) continue;
    if (!(e.metric > 0.0)) throw ValidationError("segment graph metric step cost must be positive");
    if (e.angular < 0.0 || e.angular > 180.0) throw ValidationError("angular step cost must lie in [0, 180]");
    auto upsert = [&](std::size_t from, std::size_t to) {
      for (SegmentLink& link : adjacency_[from]) {
        if (link.target == to) {
          link.metric = std::min(link.metric, e.metric);
          link.angular = std::min(link.angular, e.angular);
          return;
        }
      }
      adjacency_[from].push_back({to, e.metric, e.angular});
    };
    upsert(e.a, e.b);
    upsert(e.b, e.a);
  }
  for (auto& links : adjacency_) {
    std::sort(links.begin(), links.end(), [](const SegmentLink& x, const SegmentLink& y) { return x.target < y.target; });
  }
}

std::size_t SegmentGraph::link_count() const
{
  std::size_t total = 0;
  for (const auto& links : adjacency_) total += links.size();
  return total / 2;
}

namespace {

struct Incidence {
  std::size_t segment;
  bool at_end;  // false: geometry front, true: geometry back
  Point where;
};

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t v)
{
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

// Direction pointing away from the junction along the segment's terminal 10% chord.
Point outward_heading(const StreetSegment& s, bool at_end)
{
  const double len = polyline_length(s.geometry);
  if (at_end) return point_along(s.geometry, 0.9 * len) - s.geometry.back();
  return point_along(s.geometry, 0.1 * len) - s.geometry.front();
}

double turn_degrees(Point out_a, Point out_b)
{
  // Travelling in along a (reverse of its outward heading) and out along b.
  const Point in = out_a * -1.0;
  const double turn = std::atan2(std::abs(cross(in, out_b)), dot(in, out_b));
  return std::clamp(turn * 180.0 / std::numbers::pi, 0.0, 180.0);
}

}  // namespace

SegmentGraph build_segment_graph(const StreetNetwork& network, double snap_tolerance)
{
  if (network.segments.empty()) throw ValidationError("street network has no segments (empty graph)");
  if (snap_tolerance < 0.0) throw ValidationError("snap tolerance must be non-negative");
  network.validate(snap_tolerance);

  std::vector<Incidence> inc;
  inc.reserve(2 * network.segments.size());
  for (std::size_t i = 0; i < network.segments.size(); ++i) {
    const StreetSegment& s = network.segments[i];
    inc.push_back({i, false, network.nodes[s.from]});
    inc.push_back({i, true, network.nodes[s.to]});
  }

  // Junctions: endpoints sharing a node id or lying within the snap tolerance.
  std::vector<std::size_t> parent(inc.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto unite = [&](std::size_t a, std::size_t b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };
  std::vector<std::size_t> by_node(network.nodes.size(), inc.size());
  for (std::size_t k = 0; k < inc.size(); ++k) {
    const StreetSegment& s = network.segments[inc[k].segment];
    const std::size_t node = inc[k].at_end ? s.to : s.from;
    if (by_node[node] == inc.size()) {
      by_node[node] = k;
    } else {
      unite(by_node[node], k);
    }
  }
  std::vector<std::size_t> order(inc.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return inc[a].where.x < inc[b].where.x || (inc[a].where.x == inc[b].where.x && a < b);
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (inc[order[j]].where.x - inc[order[i]].where.x > snap_tolerance) break;
      if (distance(inc[order[i]].where, inc[order[j]].where) <= snap_tolerance) unite(order[i], order[j]);
    }
  }

  std::vector<std::vector<std::size_t>> junctions(inc.size());
  for (std::size_t k = 0; k < inc.size(); ++k) junctions[find_root(parent, k)].push_back(k);

  std::vector<SegmentGraph::Edge> edges;
  for (const auto& members : junctions) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const Incidence& x = inc[members[a]];
        const Incidence& y = inc[members[b]];
        if (x.segment == y.segment) continue;
        const StreetSegment& sx = network.segments[x.segment];
        const StreetSegment& sy = network.segments[y.segment];
        const double angle = turn_degrees(outward_heading(sx, x.at_end), outward_heading(sy, y.at_end));
        edges.push_back({x.segment, y.segment, 0.5 * (sx.length + sy.length), angle});
      }
    }
  }

  std::vector<std::int64_t> ids;
  ids.reserve(network.segments.size());
  for (const StreetSegment& s : network.segments) ids.push_back(s.id);
  return SegmentGraph(std::move(ids), edges);
}

namespace {

struct PathCost {
  double primary = 0.0;
  double secondary = 0.0;
};

double tolerance(double a, double b) { return 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

bool cost_less(const PathCost& a, const PathCost& b)
{
  const double tp = tolerance(a.primary, b.primary);
  if (a.primary < b.primary - tp) return true;
  if (a.primary > b.primary + tp) return false;
  return a.secondary < b.secondary - tolerance(a.secondary, b.secondary);
}

bool cost_equal(const PathCost& a, const PathCost& b) { return !cost_less(a, b) && !cost_less(b, a); }

PathCost step_cost(const SegmentLink& link, CostKind cost)
{
  if (cost == CostKind::metric) return {link.metric, 0.0};
  return {link.angular, link.metric};
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// Plain metric Dijkstra, optionally truncated at `limit`.
void metric_distances(const SegmentGraph& g, std::size_t source, double limit, std::vector<double>& dist)
{
  std::fill(dist.begin(), dist.end(), kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (const SegmentLink& link : g.links(v)) {
      const double nd = d + link.metric;
      if (nd > limit + tolerance(nd, limit)) continue;
      if (nd < dist[link.target]) {
        dist[link.target] = nd;
        heap.push({nd, link.target});
      }
    }
  }
}

struct Workspace {
  std::vector<PathCost> dist;
  std::vector<double> sigma;
  std::vector<double> delta;
  std::vector<char> settled;
  std::vector<char> reached;
  std::vector<std::vector<std::size_t>> preds;
  std::vector<std::size_t> order;
  std::vector<double> metric;

  explicit Workspace(std::size_t n) : dist(n), sigma(n), delta(n), settled(n), reached(n), preds(n), metric(n) {}
};

// Shortest-path DAG from `source` with exact path counts (Brandes' forward phase).
void counted_search(const SegmentGraph& g, std::size_t source, CostKind cost, double bound, Workspace& w)
{
  const std::size_t n = g.size();
  for (std::size_t v = 0; v < n; ++v) {
    w.sigma[v] = 0.0;
    w.delta[v] = 0.0;
    w.settled[v] = 0;
    w.reached[v] = 0;
    w.preds[v].clear();
  }
  w.order.clear();

  struct Item {
    PathCost cost;
    std::size_t v;
  };
  auto later = [](const Item& a, const Item& b) {
    if (a.cost.primary != b.cost.primary) return a.cost.primary > b.cost.primary;
    if (a.cost.secondary != b.cost.secondary) return a.cost.secondary > b.cost.secondary;
    return a.v > b.v;
  };
  std::priority_queue<Item, std::vector<Item>, decltype(later)> heap(later);
  w.dist[source] = {0.0, 0.0};
  w.sigma[source] = 1.0;
  w.reached[source] = 1;
  heap.push({w.dist[source], source});
  while (!heap.empty()) {
    const Item top = heap.top();
    heap.pop();
    const std::size_t v = top.v;
    if (w.settled[v]) continue;
    w.settled[v] = 1;
    w.order.push_back(v);
    for (const SegmentLink& link : g.links(v)) {
      const std::size_t t = link.target;
      if (w.settled[t]) continue;
      const PathCost step = step_cost(link, cost);
      const PathCost nd{w.dist[v].primary + step.primary, w.dist[v].secondary + step.secondary};
      if (nd.primary > bound + tolerance(nd.primary, bound)) continue;
      if (!w.reached[t] || cost_less(nd, w.dist[t])) {
        w.reached[t] = 1;
        w.dist[t] = nd;
        w.sigma[t] = w.sigma[v];
        w.preds[t].assign(1, v);
        heap.push({nd, t});
      } else if (cost_equal(nd, w.dist[t])) {
        w.sigma[t] += w.sigma[v];
        w.preds[t].push_back(v);
      }
    }
  }
}

struct AnalysisOutput {
  std::vector<double> choice;
  std::vector<double> integration;
};

AnalysisOutput analyze(const SegmentGraph& g, CostKind cost, double radius, bool want_choice, bool want_integration,
                       unsigned threads)
{
  const std::size_t n = g.size();
  AnalysisOutput out;
  out.choice.assign(n, 0.0);
  out.integration.assign(n, 0.0);
  if (n == 0) return out;

  const bool bounded = std::isfinite(radius);
  // A metric search can stop at the radius; an angular one must see routes that wander further.
  const double search_bound = (cost == CostKind::metric && bounded) ? radius : kInf;

  // Fixed chunking keeps the floating-point merge order independent of the worker count.
  const std::size_t chunks = std::min<std::size_t>(n, 64);
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(want_choice ? n : 0, 0.0));

  parallel_for(chunks, threads, [&](std::size_t c) {
    Workspace w(n);
    const std::size_t begin = c * n / chunks;
    const std::size_t end = (c + 1) * n / chunks;
    for (std::size_t s = begin; s < end; ++s) {
      counted_search(g, s, cost, search_bound, w);
      if (bounded) {
        if (cost == CostKind::metric) {
          for (std::size_t v = 0; v < n; ++v) w.metric[v] = w.reached[v] ? w.dist[v].primary : kInf;
        } else {
          metric_distances(g, s, radius, w.metric);
        }
      }
      auto eligible = [&](std::size_t t) {
        if (t == s || !w.reached[t]) return false;
        if (!bounded) return true;
        return std::isfinite(w.metric[t]) && w.metric[t] <= radius + tolerance(w.metric[t], radius);
      };

      if (want_integration) {
        double total = 0.0;
        std::size_t count = 0;
        for (std::size_t t = 0; t < n; ++t) {
          if (!eligible(t)) continue;
          total += w.dist[t].primary;
          ++count;
        }
        out.integration[s] = count == 0 ? 0.0 : 1.0 / std::max(total, 1e-9);
      }

      if (want_choice) {
        std::vector<double>& acc = partial[c];
        for (auto it = w.order.rbegin(); it != w.order.rend(); ++it) {
          const std::size_t t = *it;
          const double carry = (eligible(t) ? 1.0 : 0.0) + w.delta[t];
          for (std::size_t v : w.preds[t]) w.delta[v] += w.sigma[v] / w.sigma[t] * carry;
          if (t != s) acc[t] += w.delta[t];
        }
      }
    }
  });

  if (want_choice) {
    for (const auto& p : partial) {
      for (std::size_t v = 0; v < n; ++v) out.choice[v] += p[v];
    }
    // Each unordered pair was visited from both ends.
    for (double& v : out.choice) v *= 0.5;
  }
  return out;
}

void check_radius(double radius)
{
  if (!(radius > 0.0)) throw ValidationError("analysis radius must be positive or unbounded");
}

}  // namespace

CentralityField compute_centrality(const SegmentGraph& graph, CentralityKind kind, CostKind cost, double radius,
                                   unsigned threads)
{
  if (graph.empty()) throw ValidationError("segment graph is empty");
  check_radius(radius);
  const bool choice = kind == CentralityKind::choice;
  AnalysisOutput out = analyze(graph, cost, radius, choice, !choice, threads);
  return {kind, cost, radius, choice ? std::move(out.choice) : std::move(out.integration)};
}

std::pair<CentralityField, CentralityField> compute_choice_integration(const SegmentGraph& graph, double radius,
                                                                       CentralityRequest request, unsigned threads)
{
  if (graph.empty()) throw ValidationError("segment graph is empty");
  check_radius(radius);
  CentralityField choice{CentralityKind::choice, request.choice_cost, radius, {}};
  CentralityField integration{CentralityKind::integration, request.integration_cost, radius, {}};
  if (request.choice_cost == request.integration_cost) {
    AnalysisOutput out = analyze(graph, request.choice_cost, radius, true, true, threads);
    choice.scores = std::move(out.choice);
    integration.scores = std::move(out.integration);
  } else {
    choice.scores = analyze(graph, request.choice_cost, radius, true, false, threads).choice;
    integration.scores = analyze(graph, request.integration_cost, radius, false, true, threads).integration;
  }
  return {std::move(choice), std::move(integration)};
}

std::vector<double> min_max_normalize(std::span<const double> values)
{
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::clamp((values[i] - *lo) / range, 0.0, 1.0);
  return out;
}

SegmentScoreMix mix_scores(const CentralityField& choice, const CentralityField& integration, double sigma)
{
  if (choice.scores.size() != integration.scores.size()) {
    throw ValidationError("choice and integration fields cover different segment sets");
  }
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw ValidationError("mixing weight sigma must lie in [0, 1]");
  const std::vector<double> c = min_max_normalize(choice.scores);
  const std::vector<double> g = min_max_normalize(integration.scores);
  SegmentScoreMix mix{sigma, std::vector<double>(c.size())};
  for (std::size_t i = 0; i < c.size(); ++i) mix.scores[i] = std::clamp(sigma * c[i] + (1.0 - sigma) * g[i], 0.0, 1.0);
  return mix;
}

std::vector<SegmentScoreMix> tiered_scores(const SegmentGraph& graph, std::span<const double> radii,
                                           std::span<const double> sigma_per_tier, CentralityRequest request,
                                           unsigned threads)
{
  if (radii.empty()) throw ValidationError("at least one analysis radius is required");
  if (radii.size() != sigma_per_tier.size()) throw ValidationError("one sigma per tier is required");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] < radii[i - 1])) throw ValidationError("radii must be strictly decreasing from coarse to fine");
  }
  std::vector<SegmentScoreMix> tiers;
  tiers.reserve(radii.size());
  for (std::size_t l = 0; l < radii.size(); ++l) {
    auto [choice, integration] = compute_choice_integration(graph, radii[l], request, threads);
    tiers.push_back(mix_scores(choice, integration, sigma_per_tier[l]));
  }
  return tiers;
}

}  // namespace accessplan
