#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "accessplan/geometry.hpp"
#include "accessplan/netgraph.hpp"

namespace accessplan {

struct Block {
  std::int64_t id = 0;
  Ring polygon;
  double lot_area = 0.0;  // m2
  Point centroid;
};

/// Builds a block from its outer ring; throws ValidationError on a degenerate or self-intersecting ring.
Block make_block(std::int64_t id, Ring polygon);

/// Block index -> indices of street segments bordering it.
using BlockAdjacency = std::vector<std::vector<std::size_t>>;

struct SegmentAssociation {
  BlockAdjacency adjacency;
  std::vector<std::string> warnings;  // one per block without any bordering segment
};

/// A segment borders a block when it runs along the block polygon dilated by `buffer`: the length
/// of segment inside the dilated polygon must exceed the buffer, or cover the whole segment. Streets
/// that only touch a block corner with their end therefore do not count.
SegmentAssociation associate_segments(std::span<const Block> blocks, const StreetNetwork& network,
                                      double buffer = 2.0);

class AccessibilityTensor {
 public:
  AccessibilityTensor() = default;
  AccessibilityTensor(std::size_t blocks, std::size_t tiers) : blocks_(blocks), tiers_(tiers), values_(blocks * tiers) {}

  std::size_t blocks() const { return blocks_; }
  std::size_t tiers() const { return tiers_; }
  double& at(std::size_t block, std::size_t tier) { return values_[block * tiers_ + tier]; }
  double at(std::size_t block, std::size_t tier) const { return values_[block * tiers_ + tier]; }
  std::vector<double> column(std::size_t tier) const;
  void set_column(std::size_t tier, std::span<const double> values);

  friend bool operator==(const AccessibilityTensor&, const AccessibilityTensor&) = default;

 private:
  std::size_t blocks_ = 0;
  std::size_t tiers_ = 0;
  std::vector<double> values_;
};

enum class BlockAggregation {
  max,
  // max scaled by the share of bordering segments above the tier's 75th percentile
  frontage_weighted,
};

AccessibilityTensor block_accessibility(std::span<const SegmentScoreMix> tiers, const BlockAdjacency& adjacency,
                                        BlockAggregation aggregation = BlockAggregation::max);

/// Per-tier min-max; a constant tier becomes all zeros.
AccessibilityTensor normalize_per_tier(const AccessibilityTensor& tensor);

}  // namespace accessplan
