#include "accessplan/geojson.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>

#include "accessplan/errors.hpp"

namespace accessplan {

using nlohmann::json;

namespace {

const json& features_of(const json& collection, const char* what)
{
  if (!collection.is_object() || collection.value("type", "") != "FeatureCollection") {
    throw ValidationError(std::string(what) + " must be a GeoJSON FeatureCollection");
  }
  if (!collection.contains("features") || !collection.at("features").is_array()) {
    throw ValidationError(std::string(what) + " has no features array");
  }
  const json& features = collection.at("features");
  if (features.empty()) throw ValidationError(std::string(what) + " FeatureCollection is empty");
  return features;
}

std::string feature_label(const json& feature, std::size_t index)
{
  std::string label = "feature " + std::to_string(index);
  if (feature.is_object() && feature.contains("properties") && feature.at("properties").is_object() &&
      feature.at("properties").contains("id")) {
    label += " (id " + feature.at("properties").at("id").dump() + ")";
  }
  return label;
}

std::optional<std::int64_t> feature_id(const json& feature)
{
  auto as_id = [](const json& v) -> std::optional<std::int64_t> {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
    }
    return std::nullopt;
  };
  if (feature.contains("properties") && feature.at("properties").is_object() && feature.at("properties").contains("id")) {
    if (auto id = as_id(feature.at("properties").at("id"))) return id;
  }
  if (feature.contains("id")) return as_id(feature.at("id"));
  return std::nullopt;
}

std::vector<Point> read_positions(const json& coords)
{
  if (!coords.is_array()) throw ValidationError("coordinates must be an array of positions");
  std::vector<Point> pts;
  for (const json& pos : coords) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      throw ValidationError("every position needs numeric x and y");
    }
    const Point p{pos[0].get<double>(), pos[1].get<double>()};
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ValidationError("coordinates must be finite");
    pts.push_back(p);
  }
  return pts;
}

json positions(std::span<const Point> pts, bool close)
{
  json out = json::array();
  for (const Point& p : pts) out.push_back(json::array({p.x, p.y}));
  if (close && !pts.empty()) out.push_back(json::array({pts.front().x, pts.front().y}));
  return out;
}

/// Degree coordinates are rejected: every vertex inside |x| <= 180, |y| <= 90.
void check_projected(const std::vector<Point>& all, const char* what)
{
  if (all.empty()) return;
  for (const Point& p : all) {
    if (std::abs(p.x) > 180.0 || std::abs(p.y) > 90.0) return;
  }
  throw ValidationError(std::string(what) +
                        " looks like geographic lon/lat coordinates; reproject it to a metre-based CRS (e.g. UTM) first");
}

std::ifstream open_input(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

}  // namespace

json read_json(const std::filesystem::path& path)
{
  std::ifstream in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + " is not valid JSON: " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc)
{
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(1) << '\n';
}

StreetNetwork read_network(const json& collection)
{
  const json& features = features_of(collection, "street network");
  struct Part {
    std::optional<std::int64_t> id;
    std::vector<Point> pts;
  };
  std::vector<Part> parts;
  std::vector<std::string> problems;
  std::vector<Point> all;
  for (std::size_t f = 0; f < features.size(); ++f) {
    const json& feature = features[f];
    try {
      if (!feature.is_object() || !feature.contains("geometry") || !feature.at("geometry").is_object()) {
        throw ValidationError("missing geometry");
      }
      const json& geom = feature.at("geometry");
      const std::string type = geom.value("type", "");
      std::vector<std::vector<Point>> lines;
      if (type == "LineString") {
        lines.push_back(read_positions(geom.at("coordinates")));
      } else if (type == "MultiLineString") {
        if (!geom.at("coordinates").is_array()) throw ValidationError("coordinates must be an array of lines");
        for (const json& line : geom.at("coordinates")) lines.push_back(read_positions(line));
      } else {
        throw ValidationError("unsupported geometry type '" + type + "' (expected LineString or MultiLineString)");
      }
      const std::optional<std::int64_t> id = feature_id(feature);
      for (std::size_t k = 0; k < lines.size(); ++k) {
        if (lines[k].size() < 2) throw ValidationError("a line needs at least two positions");
        if (!(polyline_length(lines[k]) > 0.0)) throw ValidationError("a line has zero length");
        all.insert(all.end(), lines[k].begin(), lines[k].end());
        parts.push_back({k == 0 ? id : std::nullopt, std::move(lines[k])});
      }
    } catch (const ValidationError& e) {
      problems.push_back(feature_label(feature, f) + ": " + e.what());
    } catch (const json::exception& e) {
      problems.push_back(feature_label(feature, f) + ": " + e.what());
    }
  }
  if (!problems.empty()) throw ValidationError("invalid street network features", problems);
  check_projected(all, "street network");

  std::set<std::int64_t> used;
  std::int64_t next = 1;
  for (const Part& p : parts) {
    if (!p.id) continue;
    if (!used.insert(*p.id).second) problems.push_back("duplicate segment id " + std::to_string(*p.id));
    next = std::max(next, *p.id + 1);
  }
  if (!problems.empty()) throw ValidationError("invalid street network features", problems);

  StreetNetwork net;
  std::map<std::pair<double, double>, std::size_t> node_index;
  auto node = [&](Point p) {
    auto [it, fresh] = node_index.emplace(std::make_pair(p.x, p.y), net.nodes.size());
    if (fresh) net.nodes.push_back(p);
    return it->second;
  };
  for (Part& p : parts) {
    StreetSegment s;
    s.id = p.id ? *p.id : next++;
    s.from = node(p.pts.front());
    s.to = node(p.pts.back());
    s.length = polyline_length(p.pts);
    s.geometry = std::move(p.pts);
    net.segments.push_back(std::move(s));
  }
  return net;
}

StreetNetwork load_network(const std::filesystem::path& path) { return read_network(read_json(path)); }

std::vector<Block> read_blocks(const json& collection)
{
  const json& features = features_of(collection, "block layer");
  std::vector<Block> blocks;
  std::vector<std::string> problems;
  std::vector<Point> all;
  std::set<std::int64_t> used;
  std::vector<std::size_t> missing_id;
  for (std::size_t f = 0; f < features.size(); ++f) {
    const json& feature = features[f];
    try {
      if (!feature.is_object() || !feature.contains("geometry") || !feature.at("geometry").is_object()) {
        throw ValidationError("missing geometry");
      }
      const json& geom = feature.at("geometry");
      const std::string type = geom.value("type", "");
      if (type != "Polygon") throw ValidationError("unsupported geometry type '" + type + "' (expected Polygon)");
      const json& rings = geom.at("coordinates");
      if (!rings.is_array() || rings.empty()) throw ValidationError("polygon has no outer ring");
      std::vector<Point> outer = read_positions(rings[0]);
      all.insert(all.end(), outer.begin(), outer.end());
      const std::optional<std::int64_t> id = feature_id(feature);
      Block b = make_block(id.value_or(0), outer);
      if (id) {
        if (!used.insert(*id).second) throw ValidationError("duplicate block id " + std::to_string(*id));
      } else {
        missing_id.push_back(blocks.size());
      }
      if (feature.contains("properties") && feature.at("properties").is_object() &&
          feature.at("properties").contains("lot_area")) {
        const json& lot = feature.at("properties").at("lot_area");
        if (!lot.is_number() || !(lot.get<double>() > 0.0)) throw ValidationError("lot_area must be a positive number");
        b.lot_area = lot.get<double>();
      }
      blocks.push_back(std::move(b));
    } catch (const ValidationError& e) {
      problems.push_back(feature_label(feature, f) + ": " + e.what());
    } catch (const json::exception& e) {
      problems.push_back(feature_label(feature, f) + ": " + e.what());
    }
  }
  if (!problems.empty()) throw ValidationError("invalid block features", problems);
  check_projected(all, "block layer");
  std::int64_t next = used.empty() ? 1 : *used.rbegin() + 1;
  for (std::size_t i : missing_id) blocks[i].id = next++;
  return blocks;
}

std::vector<Block> load_blocks(const std::filesystem::path& path) { return read_blocks(read_json(path)); }

json network_geojson(const StreetNetwork& network, std::span<const SegmentScoreMix> scores)
{
  json features = json::array();
  for (std::size_t s = 0; s < network.segments.size(); ++s) {
    const StreetSegment& seg = network.segments[s];
    json props{{"id", seg.id}, {"length", seg.length}};
    for (std::size_t l = 0; l < scores.size(); ++l) props["score_t" + std::to_string(l)] = scores[l].scores.at(s);
    features.push_back({{"type", "Feature"},
                        {"properties", props},
                        {"geometry", {{"type", "LineString"}, {"coordinates", positions(seg.geometry, false)}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

std::pair<std::vector<double>, std::vector<double>> block_far_height(std::span<const Block> blocks,
                                                                     const IntensityResult& intensity)
{
  std::vector<double> floor(blocks.size(), 0.0);
  std::vector<double> height(blocks.size(), 0.0);
  for (std::size_t k = 0; k < intensity.lots.size(); ++k) {
    const std::size_t b = intensity.lots[k].block;
    if (b >= blocks.size()) throw ValidationError("lot references an unknown block");
    floor[b] += intensity.far[k] * intensity.lots[k].area;
    height[b] = std::max(height[b], intensity.height[k]);
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) floor[b] /= blocks[b].lot_area;
  return {floor, height};
}

json blocks_geojson(std::span<const Block> blocks, const BlockLayers& layers)
{
  std::vector<double> far;
  std::vector<double> height;
  if (layers.intensity != nullptr) std::tie(far, height) = block_far_height(blocks, *layers.intensity);
  json features = json::array();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    json props{{"id", b.id}, {"lot_area", b.lot_area}};
    if (layers.access != nullptr) {
      for (std::size_t l = 0; l < layers.access->tiers(); ++l) props["A_t" + std::to_string(l)] = layers.access->at(i, l);
    }
    if (layers.clusters != nullptr) {
      for (std::size_t l = 0; l < layers.clusters->tiers.size(); ++l) {
        props["cluster_t" + std::to_string(l)] = layers.clusters->tiers[l].cluster_of.at(i);
      }
    }
    if (layers.allocation != nullptr) {
      props["use"] = std::string(1, use_code(layers.allocation->dominant.at(i)));
      for (Use u : kAllUses) props[std::string("x_") + use_code(u)] = layers.allocation->assigned.at(i)[index_of(u)];
    }
    if (layers.intensity != nullptr) {
      props["far"] = far[i];
      props["height_m"] = height[i];
    }
    features.push_back({{"type", "Feature"},
                        {"properties", props},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({positions(b.polygon, true)})}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

}  // namespace accessplan
