#include <algorithm>
#include <cmath>

#include "minpart/grid.hpp"

namespace minpart {

namespace {

double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }

int orientation(Point a, Point b, Point c, double eps) {
  const double v = cross(b - a, c - a);
  if (v > eps) return 1;
  if (v < -eps) return -1;
  return 0;
}

bool on_segment(Point a, Point b, Point p, double eps) {
  return std::min(a.x, b.x) - eps <= p.x && p.x <= std::max(a.x, b.x) + eps &&
         std::min(a.y, b.y) - eps <= p.y && p.y <= std::max(a.y, b.y) + eps;
}

bool segments_intersect(Point p1, Point p2, Point q1, Point q2, double eps) {
  const int o1 = orientation(p1, p2, q1, eps);
  const int o2 = orientation(p1, p2, q2, eps);
  const int o3 = orientation(q1, q2, p1, eps);
  const int o4 = orientation(q1, q2, p2, eps);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
  if (o1 == 0 && on_segment(p1, p2, q1, eps)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2, eps)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1, eps)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2, eps)) return true;
  return false;
}

}  // namespace

double polygon_area(const Polygon& poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * s;
}

bool polygon_is_simple(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  double scale = 0.0;
  for (const auto& p : poly) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  const double eps = 1e-12 * std::max(1.0, scale * scale);
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = poly[i];
    const Point b = poly[(i + 1) % n];
    if (std::hypot(b.x - a.x, b.y - a.y) <= 1e-14 * std::max(1.0, scale)) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      // Adjacent edges share a vertex by construction.
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(a, b, poly[j], poly[(j + 1) % n], eps)) return false;
    }
  }
  return true;
}

bool point_in_polygon(const Polygon& poly, Point p) {
  const std::size_t n = poly.size();
  bool in = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = poly[i];
    const Point b = poly[j];
    // On-edge points are outside.
    const double cr = cross(b - a, p - a);
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (std::abs(cr) <= 1e-13 * std::max(len, 1e-300) && on_segment(a, b, p, 1e-13)) return false;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xint) in = !in;
    }
  }
  return in;
}

Polygon glue_double(const Polygon& polygon, int side_index, GlueMode mode) {
  const int n = static_cast<int>(polygon.size());
  require(n >= 3, "glue_double: polygon needs at least 3 vertices");
  require(side_index >= 0 && side_index < n, "glue_double: side index out of range");
  Polygon poly = polygon;
  int s = side_index;
  if (polygon_area(poly) < 0.0) {
    std::reverse(poly.begin(), poly.end());
    // Edge (v_s, v_{s+1}) becomes edge (n-2-s) after reversal.
    s = (2 * n - 2 - s) % n;
  }
  const Point a = poly[s];
  const Point b = poly[(s + 1) % n];
  const Point d = b - a;
  const double len2 = d.x * d.x + d.y * d.y;
  double scale = 0.0;
  for (const auto& p : poly) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  require(std::sqrt(len2) > 1e-12 * std::max(1.0, scale), "glue_double: degenerate edge");

  auto mirror = [&](Point p) {
    const Point r = p - a;
    const double t = (r.x * d.x + r.y * d.y) / len2;
    const Point foot = a + t * d;
    return foot + (foot - p);
  };
  const Point mid = 0.5 * (a + b);
  auto half_turn = [&](Point p) { return 2.0 * mid - p; };

  Polygon out;
  out.reserve(2 * n - 2);
  for (int t = 0; t < n; ++t) out.push_back(poly[(s + 1 + t) % n]);
  if (mode == GlueMode::mirror) {
    for (int t = 1; t <= n - 2; ++t) out.push_back(mirror(poly[((s - t) % n + n) % n]));
  } else {
    for (int t = 2; t <= n - 1; ++t) out.push_back(half_turn(poly[(s + t) % n]));
  }
  if (!polygon_is_simple(out)) {
    throw NumericalError("glue_double: glued polygon is self-intersecting");
  }
  return out;
}

}  // namespace minpart
