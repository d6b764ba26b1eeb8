#pragma once

#include <span>
#include <string>
#include <vector>

namespace accessplan {

/// Planar point in a projected CRS (meters).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point a);
double distance(Point a, Point b);

using Polyline = std::vector<Point>;

// Polygon outer ring stored open: the closing vertex is not repeated.
using Ring = std::vector<Point>;

struct Box {
  Point min;
  Point max;

  bool overlaps(const Box& other, double pad) const;
};

Box bounding_box(std::span<const Point> pts);

double polyline_length(std::span<const Point> line);

/// Point at the given arc length from the start of the polyline, clamped to its ends.
Point point_along(std::span<const Point> line, double arc_length);

double signed_ring_area(std::span<const Point> ring);
double ring_area(std::span<const Point> ring);
Point ring_centroid(std::span<const Point> ring);

/// Drops a repeated closing vertex and consecutive duplicates.
Ring open_ring(std::span<const Point> pts);

bool point_in_ring(Point p, std::span<const Point> ring);

/// True when no two non-adjacent edges touch and no adjacent edges overlap.
bool ring_is_simple(std::span<const Point> ring);

double point_segment_distance(Point p, Point a, Point b);
bool segments_intersect(Point a, Point b, Point c, Point d);
double segment_segment_distance(Point a, Point b, Point c, Point d);

/// Distance between a polyline and a polygon (0 when they intersect or the line is inside).
double polyline_ring_distance(std::span<const Point> line, std::span<const Point> ring);

/// Length of the polyline lying within `buffer` of the polygon (its interior included).
double contact_length(std::span<const Point> line, std::span<const Point> ring, double buffer);

std::vector<Point> convex_hull(std::span<const Point> pts);

struct OrientedBox {
  Point center;
  Point major_axis;  // unit vector
  double major_length = 0.0;
  double minor_length = 0.0;
};

/// Minimum-area enclosing rectangle (rotating calipers over the hull edges).
OrientedBox min_area_rect(std::span<const Point> pts);

/// Sutherland-Hodgman clip keeping the part where dot(normal, p) <= offset.
/// Concave input can produce zero-width connector edges; the area stays exact.
Ring clip_half_plane(std::span<const Point> ring, Point normal, double offset);

/// Part of the ring whose projection on `axis` lies within [lo, hi].
Ring clip_slab(std::span<const Point> ring, Point axis, double lo, double hi);

}  // namespace accessplan
