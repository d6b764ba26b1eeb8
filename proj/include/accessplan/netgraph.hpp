#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "accessplan/geometry.hpp"

namespace accessplan {

struct StreetSegment {
  std::int64_t id = 0;
  std::size_t from = 0;  // node index
  std::size_t to = 0;
  Polyline geometry;
  double length = 0.0;  // meters
};

struct StreetNetwork {
  std::vector<Point> nodes;
  std::vector<StreetSegment> segments;

  /// Throws ValidationError listing every offending segment.
  void validate(double snap_tolerance) const;
};

enum class CentralityKind { choice, integration };
enum class CostKind { metric, angular };

const char* to_string(CentralityKind kind);
const char* to_string(CostKind cost);
CostKind parse_cost(const std::string& text);

inline constexpr double kUnboundedRadius = std::numeric_limits<double>::infinity();

/// Symmetric step between two segments that share a junction.
struct SegmentLink {
  std::size_t target = 0;
  double metric = 0.0;   // meters, midpoint to midpoint through the junction
  double angular = 0.0;  // degrees of heading change, [0, 180]
};

/// Dual graph: vertices are street segments, links join segments meeting at a junction.
class SegmentGraph {
 public:
  SegmentGraph() = default;

  struct Edge {
    std::size_t a = 0;
    std::size_t b = 0;
    double metric = 0.0;
    double angular = 0.0;
  };

  /// Builds a graph from explicit undirected edges. Parallel edges keep the cheapest costs.
  SegmentGraph(std::vector<std::int64_t> ids, std::span<const Edge> edges);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  std::int64_t id(std::size_t v) const { return ids_[v]; }
  std::span<const std::int64_t> ids() const { return ids_; }
  std::span<const SegmentLink> links(std::size_t v) const { return adjacency_[v]; }
  std::size_t link_count() const;

 private:
  std::vector<std::int64_t> ids_;
  std::vector<std::vector<SegmentLink>> adjacency_;
};

/// Joins every pair of segments whose endpoints meet within `snap_tolerance`.
/// Junction headings come from the terminal 10% chord of each segment.
SegmentGraph build_segment_graph(const StreetNetwork& network, double snap_tolerance = 0.5);

struct CentralityField {
  CentralityKind kind = CentralityKind::choice;
  CostKind cost = CostKind::metric;
  double radius = kUnboundedRadius;
  std::vector<double> scores;  // one per segment, finite and >= 0
};

/// Choice is betweenness over unordered segment pairs whose metric distance is within the
/// radius, counting every equal-cost shortest path. Integration is the reciprocal of the summed
/// path cost to segments within the radius. Angular shortest paths break angular ties by metric
/// length. `threads` = 0 picks the hardware concurrency.
CentralityField compute_centrality(const SegmentGraph& graph, CentralityKind kind, CostKind cost, double radius,
                                   unsigned threads = 0);

struct CentralityRequest {
  CostKind choice_cost = CostKind::metric;
  CostKind integration_cost = CostKind::angular;
};

/// Choice and integration fields at one radius, sharing traversals where the costs coincide.
std::pair<CentralityField, CentralityField> compute_choice_integration(const SegmentGraph& graph, double radius,
                                                                       CentralityRequest request, unsigned threads = 0);

/// Min-max to [0, 1]; a constant field maps to all zeros.
std::vector<double> min_max_normalize(std::span<const double> values);

struct SegmentScoreMix {
  double sigma = 0.0;
  std::vector<double> scores;
};

SegmentScoreMix mix_scores(const CentralityField& choice, const CentralityField& integration, double sigma);

/// One mixed field per radius. Radii run coarse to fine and must be strictly decreasing.
std::vector<SegmentScoreMix> tiered_scores(const SegmentGraph& graph, std::span<const double> radii,
                                           std::span<const double> sigma_per_tier, CentralityRequest request = {},
                                           unsigned threads = 0);

}  // namespace accessplan
