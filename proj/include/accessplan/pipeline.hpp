#pragma once

#include <cstddef>
#include <future>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "accessplan/allocator.hpp"
#include "accessplan/basins.hpp"
#include "accessplan/blockmap.hpp"
#include "accessplan/intensity.hpp"
#include "accessplan/netgraph.hpp"
#include "accessplan/policy.hpp"

namespace accessplan {

/// Immutable street network + blocks with the derived dual graph and frontage association.
struct Site {
  StreetNetwork network;
  std::vector<Block> blocks;
  SegmentGraph graph;
  BlockAdjacency adjacency;
  double total_lot_area = 0.0;
  std::vector<std::string> warnings;
};

Site make_site(StreetNetwork network, std::vector<Block> blocks, double snap_tolerance = 0.5, double buffer = 2.0);

/// Everything that shapes an evaluation but is not sampled as part of a policy.
struct EvaluationSettings {
  CentralityRequest centrality;
  BlockAggregation aggregation = BlockAggregation::max;
  std::vector<double> cluster_thresholds;  // empty: use the policy radii
  std::map<Tier, double> rank_overrides;
  std::map<Tier, double> min_parcel_overrides;
  double tau_int = 0.6;
  ShareAccounting accounting = ShareAccounting::mixed;
  double far_anchor = 0.8;
  double footprint_ratio = 0.5;
  UseVector footprint_by_use{};
  double storey_height = 3.6;
  FarFitMode fit = FarFitMode::per_use;
  double r0 = 1.2;
  unsigned threads = 0;

  void validate() const;
};

/// Memoizes choice/integration fields per radius; safe to share between threads.
class CentralityCache {
 public:
  std::pair<CentralityField, CentralityField> get(const SegmentGraph& graph, double radius, CentralityRequest request,
                                                  unsigned threads);

 private:
  using Key = std::tuple<double, CostKind, CostKind>;
  std::mutex mutex_;
  std::map<Key, std::shared_future<std::pair<CentralityField, CentralityField>>> entries_;
};

struct Evaluation {
  Policy policy;
  std::vector<std::pair<CentralityField, CentralityField>> centrality;  // raw choice, integration per tier
  std::vector<SegmentScoreMix> segment_scores;                         // per tier
  AccessibilityTensor access;                   // per-tier normalized block accessibility
  std::vector<double> weighted_access;          // rho-weighted, per block
  ClusterHierarchy clusters;
  AllocationResult allocation;
  UseVector land_areas{};
  IntensityResult intensity;
  RawObjectives raw;
  std::vector<std::string> warnings;
};

enum class Stage { access, clusters, allocation, intensity, objectives };

/// Runs centrality, block association, clustering, allocation and FAR assignment for one policy,
/// stopping after `until`.
Evaluation evaluate_pipeline(const Site& site, const Policy& policy, const EvaluationSettings& settings,
                             CentralityCache* cache = nullptr, Stage until = Stage::objectives);

/// Like evaluate_pipeline, but any failure becomes an invalid record instead of an exception.
ObjectiveRecord evaluate_policy(const Site& site, const Policy& policy, const EvaluationSettings& settings,
                                std::size_t id, CentralityCache* cache = nullptr);

/// Evaluates every policy (ids = positions) in parallel and normalizes the batch.
std::vector<ObjectiveRecord> evaluate_batch(const Site& site, std::span<const Policy> policies,
                                            const EvaluationSettings& settings);

}  // namespace accessplan
