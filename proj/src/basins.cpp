#include "accessplan/basins.hpp"

#include <algorithm>
#include <numeric>

#include "accessplan/errors.hpp"

namespace accessplan {

double centroid_distance(const Block& a, const Block& b) { return distance(a.centroid, b.centroid); }

ClusterHierarchy build_clusters(std::span<const Block> blocks, const AccessibilityTensor& tensor,
                                std::span<const double> thresholds, const BlockDistance& dist)
{
  if (tensor.blocks() != blocks.size()) throw ValidationError("accessibility tensor does not match the block list");
  if (thresholds.size() != tensor.tiers()) throw ValidationError("one cluster threshold per tier is required");
  for (double c : thresholds) {
    if (!(c > 0.0)) throw ValidationError("cluster thresholds must be positive");
  }

  ClusterHierarchy h;
  h.tiers.resize(thresholds.size());
  const std::size_t n = blocks.size();
  for (std::size_t l = 0; l < thresholds.size(); ++l) {
    TierClusters& tier = h.tiers[l];
    tier.threshold = thresholds[l];
    tier.cluster_of.assign(n, 0);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double sa = tensor.at(a, l);
      const double sb = tensor.at(b, l);
      if (sa != sb) return sa > sb;
      return blocks[a].id < blocks[b].id;
    });

    std::vector<char> assigned(n, 0);
    for (std::size_t seed : order) {
      if (assigned[seed]) continue;
      Cluster c;
      c.id = tier.clusters.size();
      c.center = seed;
      for (std::size_t k : order) {
        if (assigned[k]) continue;
        if (k == seed || dist(blocks[seed], blocks[k]) <= tier.threshold) {
          assigned[k] = 1;
          tier.cluster_of[k] = c.id;
          if (k == seed) {
            c.members.insert(c.members.begin(), k);
          } else {
            c.members.push_back(k);
          }
        }
      }
      tier.clusters.push_back(std::move(c));
    }
  }
  return h;
}

std::vector<std::size_t> eligible_clusters(const ClusterHierarchy& hierarchy, std::size_t tier,
                                           std::span<const double> remaining, std::span<const Block> blocks,
                                           double tau_int)
{
  if (tier >= hierarchy.tiers.size()) throw ValidationError("tier index out of range");
  if (!(tau_int >= 0.0 && tau_int <= 1.0)) throw ValidationError("cluster integrity threshold must lie in [0, 1]");
  std::vector<std::size_t> out;
  for (const Cluster& c : hierarchy.tiers[tier].clusters) {
    double rem = 0.0;
    double lot = 0.0;
    for (std::size_t i : c.members) {
      rem += remaining[i];
      lot += blocks[i].lot_area;
    }
    if (rem >= tau_int * lot) out.push_back(c.id);
  }
  return out;
}

}  // namespace accessplan
