#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "accessplan/blockmap.hpp"

namespace accessplan {

struct Cluster {
  std::size_t id = 0;
  std::size_t center = 0;              // block index
  std::vector<std::size_t> members;    // block indices, center first
};

struct TierClusters {
  double threshold = 0.0;  // gathering radius, meters
  std::vector<Cluster> clusters;
  std::vector<std::size_t> cluster_of;  // block index -> cluster id
};

struct ClusterHierarchy {
  std::vector<TierClusters> tiers;
};

using BlockDistance = std::function<double(const Block&, const Block&)>;

double centroid_distance(const Block& a, const Block& b);

/// Greedy peak seeding per tier: the best-scoring unassigned block (ties: lower block id) becomes a
/// center and gathers every unassigned block within the tier threshold of it.
ClusterHierarchy build_clusters(std::span<const Block> blocks, const AccessibilityTensor& tensor,
                                std::span<const double> thresholds, const BlockDistance& dist = centroid_distance);

/// Clusters whose remaining area is at least tau_int of their lot area.
std::vector<std::size_t> eligible_clusters(const ClusterHierarchy& hierarchy, std::size_t tier,
                                           std::span<const double> remaining, std::span<const Block> blocks,
                                           double tau_int);

}  // namespace accessplan
