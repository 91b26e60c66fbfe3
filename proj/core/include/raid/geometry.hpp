#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace raid::geometry {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Closed ring stored without the repeated closing vertex.
using Ring = std::vector<Point2>;

/// One outer ring with zero or more holes. Outer rings are counterclockwise,
/// holes clockwise.
struct Polygon {
  Ring outer;
  std::vector<Ring> holes;
};

struct Bounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  bool empty() const { return !(max_x >= min_x && max_y >= min_y); }
};

/// A region as a set of polygons with holes. Constructing from polygons
/// validates vertex counts and finiteness and normalizes ring orientation;
/// use repair() for input that may self-intersect.
class PolygonSet {
 public:
  PolygonSet() = default;
  explicit PolygonSet(std::vector<Polygon> polygons);

  static PolygonSet rectangle(double min_x, double min_y, double max_x,
                              double max_y);
  /// Regular n-gon approximating a circle.
  static PolygonSet disk(Point2 center, double radius, int segments = 64);
  /// Concentric ring between two radii.
  static PolygonSet annulus(Point2 center, double inner_radius,
                            double outer_radius, int segments = 64);

  const std::vector<Polygon>& polygons() const { return polygons_; }
  bool empty() const { return polygons_.empty(); }
  std::size_t ring_count() const;
  std::size_t vertex_count() const;
  Bounds bounds() const;

  /// Applies p -> scale * p + offset to every vertex.
  PolygonSet transformed(double scale, Point2 offset) const;

 private:
  std::vector<Polygon> polygons_;
};

/// Annular sector bin: center, angular interval [phi_lo, phi_hi), radial
/// interval [r_lo, r_hi).
struct AnnularSector {
  Point2 center;
  double phi_lo = 0.0;
  double phi_hi = kTwoPi;
  double r_lo = 0.0;
  double r_hi = 1.0;

  void validate() const;
  /// Exact area of the curved sector.
  double exact_area() const;
  /// Exact centroid of the curved sector.
  Point2 exact_centroid() const;
};

double signed_ring_area(std::span<const Point2> ring);

double area(const PolygonSet& p);

/// Area-weighted centroid. Throws DegenerateRegion for zero-area input.
Point2 centroid(const PolygonSet& p);

/// Polygonal approximation of an annular sector with arc_segments chords per
/// full circle. Chord vertices lie on the arcs.
PolygonSet sector_polygon(const AnnularSector& s, int arc_segments = 64);

double intersection_area(const PolygonSet& a, const PolygonSet& b);

PolygonSet intersection(const PolygonSet& a, const PolygonSet& b);
PolygonSet unite(const PolygonSet& a, const PolygonSet& b);
PolygonSet unite(std::span<const PolygonSet> parts);
PolygonSet difference(const PolygonSet& a, const PolygonSet& b);
PolygonSet clip_to_bounds(const PolygonSet& p, const Bounds& box);

/// Builds a valid region from raw rings with even-odd fill semantics:
/// self-intersections are split and overlapping parts cancel pairwise.
/// Throws InvalidPolygon when the input cannot be repaired.
PolygonSet repair(std::span<const Ring> rings);
PolygonSet repair(const Ring& ring);

/// Even-odd containment test. Points exactly on the boundary may go either
/// way.
bool contains(const PolygonSet& p, Point2 q);

/// Closest point of the region to q (q itself when inside).
Point2 closest_point(const PolygonSet& p, Point2 q);

/// Largest distance from q to any vertex of p.
double max_vertex_distance(const PolygonSet& p, Point2 q);

/// Cell centers origin + ((i + 1/2) h, (j + 1/2) h) that fall inside the
/// region, ordered by row then column. If none do, returns the point of the
/// region closest to its centroid.
std::vector<Point2> sample_grid(const PolygonSet& region, double spacing,
                                Point2 origin = {0.0, 0.0});

}  // namespace raid::geometry
