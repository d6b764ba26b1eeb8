#include "accessplan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace accessplan {

double norm(Point a) { return std::hypot(a.x, a.y); }

double distance(Point a, Point b) { return norm(a - b); }

bool Box::overlaps(const Box& other, double pad) const
{
  return min.x - pad <= other.max.x && other.min.x - pad <= max.x && min.y - pad <= other.max.y &&
         other.min.y - pad <= max.y;
}

Box bounding_box(std::span<const Point> pts)
{
  constexpr double inf = std::numeric_limits<double>::infinity();
  Box box{{inf, inf}, {-inf, -inf}};
  for (const Point& p : pts) {
    box.min.x = std::min(box.min.x, p.x);
    box.min.y = std::min(box.min.y, p.y);
    box.max.x = std::max(box.max.x, p.x);
    box.max.y = std::max(box.max.y, p.y);
  }
  return box;
}

double polyline_length(std::span<const Point> line)
{
  double total = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) total += distance(line[i - 1], line[i]);
  return total;
}

Point point_along(std::span<const Point> line, double arc_length)
{
  if (line.empty()) return {};
  if (arc_length <= 0.0) return line.front();
  double walked = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    const double step = distance(line[i - 1], line[i]);
    if (walked + step >= arc_length && step > 0.0) {
      const double t = (arc_length - walked) / step;
      return line[i - 1] + (line[i] - line[i - 1]) * t;
    }
    walked += step;
  }
  return line.back();
}

double signed_ring_area(std::span<const Point> ring)
{
  if (ring.size() < 3) return 0.0;
  // Shoelace relative to the first vertex keeps precision for large projected coordinates.
  const Point origin = ring.front();
  double twice = 0.0;
  for (std::size_t i = 1; i + 1 < ring.size(); ++i) {
    twice += cross(ring[i] - origin, ring[i + 1] - origin);
  }
  return 0.5 * twice;
}

double ring_area(std::span<const Point> ring) { return std::abs(signed_ring_area(ring)); }

Point ring_centroid(std::span<const Point> ring)
{
  if (ring.empty()) return {};
  const Point origin = ring.front();
  double twice = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t i = 1; i + 1 < ring.size(); ++i) {
    const Point a = ring[i] - origin;
    const Point b = ring[i + 1] - origin;
    const double c = cross(a, b);
    twice += c;
    cx += (a.x + b.x) * c;
    cy += (a.y + b.y) * c;
  }
  if (std::abs(twice) < 1e-12) {
    Point mean{};
    for (const Point& p : ring) mean = mean + p;
    return mean * (1.0 / static_cast<double>(ring.size()));
  }
  return origin + Point{cx / (3.0 * twice), cy / (3.0 * twice)};
}

Ring open_ring(std::span<const Point> pts)
{
  Ring out;
  out.reserve(pts.size());
  for (const Point& p : pts) {
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  }
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

bool point_in_ring(Point p, std::span<const Point> ring)
{
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = ring[i];
    const Point& b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

namespace {

int orientation(Point a, Point b, Point c)
{
  const double v = cross(b - a, c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(Point a, Point b, Point p)
{
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(Point a, Point b, Point c, Point d)
{
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

bool ring_is_simple(std::span<const Point> ring)
{
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = ring[i];
    const Point b = ring[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point c = ring[j];
      const Point d = ring[(j + 1) % n];
      const bool next = j == i + 1;
      const bool wrap = i == 0 && j == n - 1;
      if (next) {
        // Shared vertex b == c; the edges must not fold back onto each other.
        if (orientation(a, b, d) == 0 && dot(a - b, d - b) > 0.0) return false;
        continue;
      }
      if (wrap) {
        if (orientation(c, d, b) == 0 && dot(c - a, b - a) > 0.0) return false;
        continue;
      }
      if (segments_intersect(a, b, c, d)) return false;
    }
  }
  return true;
}

double point_segment_distance(Point p, Point a, Point b)
{
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

double segment_segment_distance(Point a, Point b, Point c, Point d)
{
  if (segments_intersect(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

double polyline_ring_distance(std::span<const Point> line, std::span<const Point> ring)
{
  if (line.empty() || ring.empty()) return std::numeric_limits<double>::infinity();
  if (point_in_ring(line.front(), ring)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = ring.size();
  for (std::size_t i = 1; i < line.size(); ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      best = std::min(best, segment_segment_distance(line[i - 1], line[i], ring[k], ring[(k + 1) % n]));
      if (best == 0.0) return 0.0;
    }
  }
  return best;
}

namespace {

using Interval = std::pair<double, double>;

// Parameter interval of segment (a,b) within distance r of edge (c,d). The distance is convex
// along the segment, so the sublevel set is a single interval.
bool capsule_interval(Point a, Point b, Point c, Point d, double r, Interval& out)
{
  auto f = [&](double t) { return point_segment_distance(a + (b - a) * t, c, d); };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) <= f(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  const double tmin = 0.5 * (lo + hi);
  if (f(tmin) > r) return false;
  double left = 0.0;
  if (f(0.0) > r) {
    double l = 0.0;
    double h = tmin;
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (l + h);
      (f(m) <= r ? h : l) = m;
    }
    left = h;
  }
  double right = 1.0;
  if (f(1.0) > r) {
    double l = tmin;
    double h = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (l + h);
      (f(m) <= r ? l : h) = m;
    }
    right = l;
  }
  out = {left, right};
  return right > left;
}

void inside_intervals(Point a, Point b, std::span<const Point> ring, std::vector<Interval>& out)
{
  std::vector<double> cuts{0.0, 1.0};
  const Point ab = b - a;
  const std::size_t n = ring.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Point c = ring[k];
    const Point cd = ring[(k + 1) % n] - c;
    const double den = cross(ab, cd);
    if (den == 0.0) continue;
    const double t = cross(c - a, cd) / den;
    const double u = cross(c - a, ab) / den;
    if (t > 0.0 && t < 1.0 && u >= 0.0 && u <= 1.0) cuts.push_back(t);
  }
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i - 1] + cuts[i]);
    if (point_in_ring(a + ab * mid, ring)) out.emplace_back(cuts[i - 1], cuts[i]);
  }
}

}  // namespace

double contact_length(std::span<const Point> line, std::span<const Point> ring, double buffer)
{
  if (line.size() < 2 || ring.size() < 3) return 0.0;
  const double r = buffer + 1e-7;
  const std::size_t n = ring.size();
  double total = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    const Point a = line[i - 1];
    const Point b = line[i];
    const double len = distance(a, b);
    if (len == 0.0) continue;
    std::vector<Interval> parts;
    for (std::size_t k = 0; k < n; ++k) {
      Interval iv;
      if (capsule_interval(a, b, ring[k], ring[(k + 1) % n], r, iv)) parts.push_back(iv);
    }
    inside_intervals(a, b, ring, parts);
    if (parts.empty()) continue;
    std::sort(parts.begin(), parts.end());
    double covered = 0.0;
    double cur_lo = parts.front().first;
    double cur_hi = parts.front().second;
    for (std::size_t k = 1; k < parts.size(); ++k) {
      if (parts[k].first <= cur_hi) {
        cur_hi = std::max(cur_hi, parts[k].second);
      } else {
        covered += cur_hi - cur_lo;
        cur_lo = parts[k].first;
        cur_hi = parts[k].second;
      }
    }
    covered += cur_hi - cur_lo;
    total += covered * len;
  }
  return total;
}

std::vector<Point> convex_hull(std::span<const Point> pts)
{
  std::vector<Point> p(pts.begin(), pts.end());
  std::sort(p.begin(), p.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  std::vector<Point> hull(2 * p.size());
  std::size_t k = 0;
  for (const Point& q : p) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], q - hull[k - 2]) <= 0.0) --k;
    hull[k++] = q;
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
    const Point q = p[i - 1];
    while (k >= t && cross(hull[k - 1] - hull[k - 2], q - hull[k - 2]) <= 0.0) --k;
    hull[k++] = q;
  }
  hull.resize(k - 1);
  return hull;
}

OrientedBox min_area_rect(std::span<const Point> pts)
{
  const std::vector<Point> hull = convex_hull(pts);
  OrientedBox best;
  if (hull.empty()) return best;
  if (hull.size() == 1) {
    best.center = hull.front();
    best.major_axis = {1.0, 0.0};
    return best;
  }
  double best_area = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point edge = hull[(i + 1) % hull.size()] - hull[i];
    const double len = norm(edge);
    if (len == 0.0) continue;
    const Point u = edge * (1.0 / len);
    const Point v{-u.y, u.x};
    double umin = std::numeric_limits<double>::infinity();
    double umax = -umin;
    double vmin = umin;
    double vmax = -umin;
    for (const Point& q : hull) {
      umin = std::min(umin, dot(q, u));
      umax = std::max(umax, dot(q, u));
      vmin = std::min(vmin, dot(q, v));
      vmax = std::max(vmax, dot(q, v));
    }
    const double area = (umax - umin) * (vmax - vmin);
    if (area < best_area - 1e-12 * std::max(1.0, area)) {
      best_area = area;
      const Point center = u * (0.5 * (umin + umax)) + v * (0.5 * (vmin + vmax));
      if (umax - umin >= vmax - vmin) {
        best = {center, u, umax - umin, vmax - vmin};
      } else {
        best = {center, v, vmax - vmin, umax - umin};
      }
    }
  }
  return best;
}

Ring clip_half_plane(std::span<const Point> ring, Point normal, double offset)
{
  Ring out;
  const std::size_t n = ring.size();
  if (n == 0) return out;
  out.reserve(n + 4);
  for (std::size_t i = 0; i < n; ++i) {
    const Point cur = ring[i];
    const Point nxt = ring[(i + 1) % n];
    const double dc = dot(normal, cur) - offset;
    const double dn = dot(normal, nxt) - offset;
    if (dc <= 0.0) out.push_back(cur);
    if ((dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0)) {
      const double t = dc / (dc - dn);
      out.push_back(cur + (nxt - cur) * t);
    }
  }
  return open_ring(out);
}

Ring clip_slab(std::span<const Point> ring, Point axis, double lo, double hi)
{
  const Ring upper = clip_half_plane(ring, axis, hi);
  return clip_half_plane(upper, axis * -1.0, -lo);
}

}  // namespace accessplan
