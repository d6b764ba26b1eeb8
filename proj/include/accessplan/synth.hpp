#pragma once

#include <cstddef>
#include <vector>

#include "accessplan/blockmap.hpp"
#include "accessplan/geometry.hpp"
#include "accessplan/netgraph.hpp"

namespace accessplan {

struct SyntheticSite {
  StreetNetwork network;
  std::vector<Block> blocks;
};

/// Default origin keeps synthetic coordinates clear of the lon/lat range check.
inline constexpr Point kSyntheticOrigin{500000.0, 4180000.0};

/// n x n street intersections spaced `block_size` apart: 2n(n-1) segments (horizontal first, row by
/// row, then vertical) and (n-1)^2 square blocks numbered row by row from the origin corner.
SyntheticSite make_synthetic_grid(std::size_t n, double block_size = 100.0, Point origin = kSyntheticOrigin);

}  // namespace accessplan
