#include "raid/geometry.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "raid/error.hpp"

namespace raid::geometry {


namespace {

void check_ring(const Ring& r) {
  if (r.size() < 3) {
    throw Error(ErrorCode::InvalidPolygon,
                "ring has " + std::to_string(r.size()) +
                    " vertices; at least 3 are required");
  }
  for (const auto& p : r) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::InvalidPolygon, "ring has non-finite coordinates");
    }
  }
}

void orient(Ring& r, bool ccw) {
  if ((signed_ring_area(r) > 0.0) != ccw) std::reverse(r.begin(), r.end());
}

}  // namespace

PolygonSet::PolygonSet(std::vector<Polygon> polygons)
    : polygons_(std::move(polygons)) {
  for (auto& poly : polygons_) {
    check_ring(poly.outer);
    orient(poly.outer, true);
    for (auto& h : poly.holes) {
      check_ring(h);
      orient(h, false);
    }
  }
}

PolygonSet PolygonSet::rectangle(double min_x, double min_y, double max_x,
                                 double max_y) {
  Polygon p;
  p.outer = {{min_x, min_y}, {max_x, min_y}, {max_x, max_y}, {min_x, max_y}};
  return PolygonSet({std::move(p)});
}

namespace {

Ring circle_ring(Point2 c, double r, int segments) {
  Ring ring;
  ring.reserve(static_cast<std::size_t>(segments));
  for (int k = 0; k < segments; ++k) {
    const double a = kTwoPi * k / segments;
    ring.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  return ring;
}

}  // namespace

PolygonSet PolygonSet::disk(Point2 center, double radius, int segments) {
  Polygon p;
  p.outer = circle_ring(center, radius, segments);
  return PolygonSet({std::move(p)});
}

PolygonSet PolygonSet::annulus(Point2 center, double inner_radius,
                               double outer_radius, int segments) {
  Polygon p;
  p.outer = circle_ring(center, outer_radius, segments);
  p.holes.push_back(circle_ring(center, inner_radius, segments));
  return PolygonSet({std::move(p)});
}

std::size_t PolygonSet::ring_count() const {
  std::size_t n = 0;
  for (const auto& p : polygons_) n += 1 + p.holes.size();
  return n;
}

std::size_t PolygonSet::vertex_count() const {
  std::size_t n = 0;
  for (const auto& p : polygons_) {
    n += p.outer.size();
    for (const auto& h : p.holes) n += h.size();
  }
  return n;
}

Bounds PolygonSet::bounds() const {
  Bounds b{std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};
  for (const auto& p : polygons_) {
    for (const auto& v : p.outer) {
      b.min_x = std::min(b.min_x, v.x);
      b.min_y = std::min(b.min_y, v.y);
      b.max_x = std::max(b.max_x, v.x);
      b.max_y = std::max(b.max_y, v.y);
    }
  }
  return b;
}

PolygonSet PolygonSet::transformed(double scale, Point2 offset) const {
  std::vector<Polygon> out = polygons_;
  auto apply = [&](Ring& r) {
    for (auto& v : r) v = scale * v + offset;
  };
  for (auto& p : out) {
    apply(p.outer);
    for (auto& h : p.holes) apply(h);
  }
  return PolygonSet(std::move(out));
}

void AnnularSector::validate() const {
  if (!(r_lo >= 0.0 && r_hi > r_lo)) {
    throw Error(ErrorCode::BadRequest, "annular sector needs 0 <= r_lo < r_hi");
  }
  const double span = phi_hi - phi_lo;
  if (!(span > 0.0 && span <= kTwoPi + 1e-12)) {
    throw Error(ErrorCode::BadRequest,
                "annular sector needs 0 < phi_hi - phi_lo <= 2 pi");
  }
}

double AnnularSector::exact_area() const {
  return 0.5 * (phi_hi - phi_lo) * (r_hi * r_hi - r_lo * r_lo);
}

Point2 AnnularSector::exact_centroid() const {
  const double span = phi_hi - phi_lo;
  const double half = 0.5 * span;
  const double radial = (2.0 / 3.0) * (r_hi * r_hi * r_hi - r_lo * r_lo * r_lo) /
                        (r_hi * r_hi - r_lo * r_lo);
  const double d = radial * std::sin(half) / half;
  const double mid = phi_lo + half;
  return {center.x + d * std::cos(mid), center.y + d * std::sin(mid)};
}

double signed_ring_area(std::span<const Point2> ring) {
  if (ring.size() < 3) return 0.0;
  const Point2 o = ring.front();
  double twice = 0.0;
  for (std::size_t i = 1; i + 1 < ring.size(); ++i) {
    twice += cross(ring[i] - o, ring[i + 1] - o);
  }
  return 0.5 * twice;
}

double area(const PolygonSet& p) {
  double a = 0.0;
  for (const auto& poly : p.polygons()) {
    a += std::abs(signed_ring_area(poly.outer));
    for (const auto& h : poly.holes) a -= std::abs(signed_ring_area(h));
  }
  return std::max(a, 0.0);
}

Point2 centroid(const PolygonSet& p) {
  double total = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  const Bounds b = p.bounds();
  if (b.empty()) {
    throw Error(ErrorCode::DegenerateRegion, "centroid of an empty region");
  }
  const Point2 o{b.min_x, b.min_y};
  auto accumulate = [&](const Ring& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Point2 u = r[i] - o;
      const Point2 v = r[(i + 1) % r.size()] - o;
      const double c = cross(u, v);
      total += c;
      cx += (u.x + v.x) * c;
      cy += (u.y + v.y) * c;
    }
  };
  for (const auto& poly : p.polygons()) {
    accumulate(poly.outer);
    for (const auto& h : poly.holes) accumulate(h);
  }
  const double scale = std::max(b.width(), b.height());
  if (!(total > 1e-14 * scale * scale) || scale == 0.0) {
    throw Error(ErrorCode::DegenerateRegion, "region has zero area");
  }
  return {o.x + cx / (3.0 * total), o.y + cy / (3.0 * total)};
}

PolygonSet sector_polygon(const AnnularSector& s, int arc_segments) {
  s.validate();
  if (arc_segments < 4) {
    throw Error(ErrorCode::BadRequest, "arc_segments must be at least 4");
  }
  const double span = s.phi_hi - s.phi_lo;
  const int n = std::max(
      1, static_cast<int>(std::ceil(arc_segments * span / kTwoPi - 1e-9)));
  auto arc = [&](double r, bool forward, bool closed_circle) {
    Ring ring;
    const int count = closed_circle ? n : n + 1;
    for (int k = 0; k < count; ++k) {
      const int idx = forward ? k : n - k;
      const double a = s.phi_lo + span * idx / n;
      ring.push_back({s.center.x + r * std::cos(a), s.center.y + r * std::sin(a)});
    }
    return ring;
  };
  const bool full = span >= kTwoPi - 1e-12;
  Polygon poly;
  if (full) {
    poly.outer = arc(s.r_hi, true, true);
    if (s.r_lo > 0.0) poly.holes.push_back(arc(s.r_lo, false, true));
  } else if (s.r_lo == 0.0) {
    poly.outer.push_back(s.center);
    Ring outer = arc(s.r_hi, true, false);
    poly.outer.insert(poly.outer.end(), outer.begin(), outer.end());
  } else {
    poly.outer = arc(s.r_hi, true, false);
    Ring inner = arc(s.r_lo, false, false);
    poly.outer.insert(poly.outer.end(), inner.begin(), inner.end());
  }
  return PolygonSet({std::move(poly)});
}

namespace {

template <typename Fn>
void for_each_edge(const PolygonSet& p, Fn&& fn) {
  auto ring_edges = [&](const Ring& r) {
    for (std::size_t i = 0; i < r.size(); ++i) fn(r[i], r[(i + 1) % r.size()]);
  };
  for (const auto& poly : p.polygons()) {
    ring_edges(poly.outer);
    for (const auto& h : poly.holes) ring_edges(h);
  }
}

}  // namespace

bool contains(const PolygonSet& p, Point2 q) {
  bool inside = false;
  for_each_edge(p, [&](Point2 a, Point2 b) {
    if ((a.y <= q.y) != (b.y <= q.y)) {
      const double x = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (q.x < x) inside = !inside;
    }
  });
  return inside;
}

Point2 closest_point(const PolygonSet& p, Point2 q) {
  if (contains(p, q)) return q;
  Point2 best = q;
  double best_d2 = std::numeric_limits<double>::infinity();
  for_each_edge(p, [&](Point2 a, Point2 b) {
    const Point2 e = b - a;
    const double len2 = dot(e, e);
    double t = len2 > 0.0 ? dot(q - a, e) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Point2 c = a + t * e;
    const Point2 d = q - c;
    const double d2 = dot(d, d);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  });
  return best;
}

double max_vertex_distance(const PolygonSet& p, Point2 q) {
  double best = 0.0;
  for (const auto& poly : p.polygons()) {
    for (const auto& v : poly.outer) best = std::max(best, distance(v, q));
  }
  return best;
}

std::vector<Point2> sample_grid(const PolygonSet& region, double spacing, Point2 origin) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw Error(ErrorCode::BadRequest, "sample spacing must be positive");
  }
  std::vector<Point2> out;
  const Bounds b = region.bounds();
  if (b.empty()) return out;

  const auto j_lo = static_cast<long long>(std::ceil((b.min_y - origin.y) / spacing - 0.5));
  const auto j_hi = static_cast<long long>(std::floor((b.max_y - origin.y) / spacing - 0.5));
  std::vector<double> xs;
  for (long long j = j_lo; j <= j_hi; ++j) {
    const double y = origin.y + (static_cast<double>(j) + 0.5) * spacing;
    xs.clear();
    for_each_edge(region, [&](Point2 a, Point2 c) {
      if ((a.y <= y) != (c.y <= y)) {
        xs.push_back(a.x + (y - a.y) * (c.x - a.x) / (c.y - a.y));
      }
    });
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const auto i_lo = static_cast<long long>(std::ceil((xs[k] - origin.x) / spacing - 0.5));
      const auto i_end =
          static_cast<long long>(std::ceil((xs[k + 1] - origin.x) / spacing - 0.5));
      for (long long i = i_lo; i < i_end; ++i) {
        out.push_back({origin.x + (static_cast<double>(i) + 0.5) * spacing, y});
      }
    }
  }
  if (out.empty()) {
    const Point2 c = centroid(region);
    out.push_back(closest_point(region, c));
  }
  return out;
}

}  // namespace raid::geometry
