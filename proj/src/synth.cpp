#include "accessplan/synth.hpp"

#include <cmath>

#include "accessplan/errors.hpp"

namespace accessplan {

SyntheticSite make_synthetic_grid(std::size_t n, double block_size, Point origin)
{
  if (n < 2) throw ValidationError("synthetic grid needs n >= 2");
  if (!(block_size > 0.0) || !std::isfinite(block_size)) throw ValidationError("block size must be positive");
  SyntheticSite site;
  auto node = [n](std::size_t row, std::size_t col) { return row * n + col; };
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t col = 0; col < n; ++col) {
      site.network.nodes.push_back({origin.x + static_cast<double>(col) * block_size,
                                    origin.y + static_cast<double>(row) * block_size});
    }
  }
  std::int64_t id = 1;
  auto add = [&](std::size_t a, std::size_t b) {
    StreetSegment s;
    s.id = id++;
    s.from = a;
    s.to = b;
    s.geometry = {site.network.nodes[a], site.network.nodes[b]};
    s.length = block_size;
    site.network.segments.push_back(std::move(s));
  };
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t col = 0; col + 1 < n; ++col) add(node(row, col), node(row, col + 1));
  }
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t row = 0; row + 1 < n; ++row) add(node(row, col), node(row + 1, col));
  }
  std::int64_t block_id = 1;
  for (std::size_t row = 0; row + 1 < n; ++row) {
    for (std::size_t col = 0; col + 1 < n; ++col) {
      const auto& p = site.network.nodes;
      site.blocks.push_back(make_block(block_id++, {p[node(row, col)], p[node(row, col + 1)], p[node(row + 1, col + 1)],
                                                    p[node(row + 1, col)]}));
    }
  }
  return site;
}

}  // namespace accessplan
