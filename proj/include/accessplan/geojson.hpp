#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "accessplan/allocator.hpp"
#include "accessplan/basins.hpp"
#include "accessplan/blockmap.hpp"
#include "accessplan/intensity.hpp"
#include "accessplan/netgraph.hpp"

namespace accessplan {

/// LineString / MultiLineString features in a projected metre CRS. Every bad feature is listed
/// in the thrown ValidationError's details.
StreetNetwork read_network(const nlohmann::json& collection);
StreetNetwork load_network(const std::filesystem::path& path);

/// Polygon features (outer ring; holes are ignored). A positive `lot_area` property overrides the
/// polygon area.
std::vector<Block> read_blocks(const nlohmann::json& collection);
std::vector<Block> load_blocks(const std::filesystem::path& path);

/// Optional per-block layers written as feature properties.
struct BlockLayers {
  const AccessibilityTensor* access = nullptr;  // A_t<l>
  const ClusterHierarchy* clusters = nullptr;   // cluster_t<l>
  const AllocationResult* allocation = nullptr;  // use, x_<U>
  const IntensityResult* intensity = nullptr;    // far, height_m
};

nlohmann::json network_geojson(const StreetNetwork& network, std::span<const SegmentScoreMix> scores = {});
nlohmann::json blocks_geojson(std::span<const Block> blocks, const BlockLayers& layers = {});

/// Per-block floor area over lot area, and the tallest lot height.
std::pair<std::vector<double>, std::vector<double>> block_far_height(std::span<const Block> blocks,
                                                                     const IntensityResult& intensity);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace accessplan
