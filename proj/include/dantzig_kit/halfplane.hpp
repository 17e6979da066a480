#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace dantzig_kit {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

// { (x, y) : a·x + b·y <= c }
struct HalfPlane {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

// Axis-aligned square [-w, w]², counterclockwise.
inline std::vector<Point2> square(double w) {
  return {{-w, -w}, {w, -w}, {w, w}, {-w, w}};
}

// Sutherland–Hodgman step against one halfplane. The input is a convex
// polygon (possibly degenerate: a segment or a point); points within eps of
// the boundary line count as inside.
inline std::vector<Point2> clip(const std::vector<Point2>& poly, const HalfPlane& h,
                                double eps) {
  std::vector<Point2> out;
  const std::size_t n = poly.size();
  if (n == 0) return out;
  const double norm = std::hypot(h.a, h.b);
  if (norm == 0.0) {
    if (h.c >= -eps) return poly;
    return out;
  }
  auto signed_dist = [&](const Point2& p) { return (h.a * p.x + h.b * p.y - h.c) / norm; };
  if (n == 1) {
    if (signed_dist(poly[0]) <= eps) out.push_back(poly[0]);
    return out;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Point2& cur = poly[k];
    const Point2& nxt = poly[(k + 1) % n];
    const double dc = signed_dist(cur), dn = signed_dist(nxt);
    const bool cin = dc <= eps, nin = dn <= eps;
    if (cin) out.push_back(cur);
    if (cin != nin) {
      const double t = dc / (dc - dn);
      out.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
    }
  }
  return out;
}

// Drops consecutive (cyclic) vertices closer than eps.
inline std::vector<Point2> dedupe(std::vector<Point2> poly, double eps) {
  std::vector<Point2> out;
  for (const Point2& p : poly) {
    if (!out.empty() && std::hypot(p.x - out.back().x, p.y - out.back().y) <= eps) continue;
    out.push_back(p);
  }
  while (out.size() > 1 &&
         std::hypot(out.front().x - out.back().x, out.front().y - out.back().y) <= eps)
    out.pop_back();
  return out;
}

// Removes vertices lying on the segment joining their neighbours.
inline std::vector<Point2> drop_collinear(std::vector<Point2> poly, double eps) {
  if (poly.size() < 3) return poly;
  bool changed = true;
  while (changed && poly.size() >= 3) {
    changed = false;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Point2& a = poly[(k + poly.size() - 1) % poly.size()];
      const Point2& b = poly[k];
      const Point2& c = poly[(k + 1) % poly.size()];
      const double cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
      const double len = std::hypot(c.x - a.x, c.y - a.y);
      if (len > 0.0 && std::abs(cross) / len <= eps) {
        poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(k));
        changed = true;
        break;
      }
    }
  }
  return poly;
}

inline double signed_area(const std::vector<Point2>& poly) {
  double s = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Point2& p = poly[k];
    const Point2& q = poly[(k + 1) % poly.size()];
    s += p.x * q.y - q.x * p.y;
  }
  return 0.5 * s;
}

// Intersection of the given halfplanes with the square [-w, w]², as a
// counterclockwise vertex list. Degenerate intersections come back as two
// points (segment) or one point; an empty intersection as an empty list.
inline std::vector<Point2> intersect_halfplanes(const std::vector<HalfPlane>& planes, double w) {
  const double eps = 1e-10 * std::max(1.0, w);
  std::vector<Point2> poly = square(w);
  for (const HalfPlane& h : planes) {
    poly = dedupe(clip(poly, h, eps), eps);
    if (poly.empty()) return poly;
  }
  poly = drop_collinear(dedupe(std::move(poly), 1e3 * eps), 1e3 * eps);
  if (poly.size() == 2 && std::hypot(poly[0].x - poly[1].x, poly[0].y - poly[1].y) <= 1e3 * eps)
    poly.pop_back();
  return poly;
}

}  // namespace dantzig_kit
