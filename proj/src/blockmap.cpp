#include "accessplan/blockmap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "accessplan/errors.hpp"

namespace accessplan {

Block make_block(std::int64_t id, Ring polygon)
{
  Ring ring = open_ring(polygon);
  if (ring.size() < 3) throw ValidationError("block " + std::to_string(id) + ": polygon needs at least three vertices");
  if (!ring_is_simple(ring)) throw ValidationError("block " + std::to_string(id) + ": polygon is self-intersecting");
  const double area = ring_area(ring);
  if (!(area > 0.0)) throw ValidationError("block " + std::to_string(id) + ": polygon has zero area");
  Block b;
  b.id = id;
  b.centroid = ring_centroid(ring);
  b.lot_area = area;
  b.polygon = std::move(ring);
  return b;
}

SegmentAssociation associate_segments(std::span<const Block> blocks, const StreetNetwork& network, double buffer)
{
  if (buffer < 0.0) throw ValidationError("adjacency buffer must be non-negative");
  SegmentAssociation out;
  out.adjacency.resize(blocks.size());

  std::vector<Box> seg_boxes;
  seg_boxes.reserve(network.segments.size());
  for (const StreetSegment& s : network.segments) seg_boxes.push_back(bounding_box(s.geometry));

  constexpr double kSlack = 1e-3;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Box box = bounding_box(blocks[b].polygon);
    for (std::size_t s = 0; s < network.segments.size(); ++s) {
      if (!box.overlaps(seg_boxes[s], buffer + kSlack)) continue;
      const StreetSegment& seg = network.segments[s];
      if (polyline_ring_distance(seg.geometry, blocks[b].polygon) > buffer + kSlack) continue;
      const double contact = contact_length(seg.geometry, blocks[b].polygon, buffer);
      const double length = polyline_length(seg.geometry);
      if (contact > buffer + kSlack || (length > 0.0 && contact >= length - 1e-9)) out.adjacency[b].push_back(s);
    }
    if (out.adjacency[b].empty()) {
      std::ostringstream msg;
      msg << "block " << blocks[b].id << " has no bordering street segment; its accessibility is 0";
      out.warnings.push_back(msg.str());
    }
  }
  return out;
}

std::vector<double> AccessibilityTensor::column(std::size_t tier) const
{
  std::vector<double> out(blocks_);
  for (std::size_t i = 0; i < blocks_; ++i) out[i] = at(i, tier);
  return out;
}

void AccessibilityTensor::set_column(std::size_t tier, std::span<const double> values)
{
  for (std::size_t i = 0; i < blocks_; ++i) at(i, tier) = values[i];
}

namespace {

double percentile75(std::vector<double> v)
{
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = 0.75 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

AccessibilityTensor block_accessibility(std::span<const SegmentScoreMix> tiers, const BlockAdjacency& adjacency,
                                        BlockAggregation aggregation)
{
  AccessibilityTensor tensor(adjacency.size(), tiers.size());
  for (std::size_t l = 0; l < tiers.size(); ++l) {
    const std::vector<double>& scores = tiers[l].scores;
    const double cut = aggregation == BlockAggregation::frontage_weighted ? percentile75(scores) : 0.0;
    for (std::size_t b = 0; b < adjacency.size(); ++b) {
      double best = 0.0;
      std::size_t high = 0;
      for (std::size_t s : adjacency[b]) {
        if (s >= scores.size()) throw ValidationError("block adjacency references an unknown segment");
        best = std::max(best, scores[s]);
        if (scores[s] > cut) ++high;
      }
      if (aggregation == BlockAggregation::frontage_weighted && !adjacency[b].empty()) {
        best *= static_cast<double>(high) / static_cast<double>(adjacency[b].size());
      }
      tensor.at(b, l) = best;
    }
  }
  return tensor;
}

AccessibilityTensor normalize_per_tier(const AccessibilityTensor& tensor)
{
  AccessibilityTensor out(tensor.blocks(), tensor.tiers());
  for (std::size_t l = 0; l < tensor.tiers(); ++l) {
    const std::vector<double> col = tensor.column(l);
    out.set_column(l, min_max_normalize(col));
  }
  return out;
}

}  // namespace accessplan
