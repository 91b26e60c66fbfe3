#pragma once

// Reference computations written independently of the library: plain
// formulas, brute force and Monte Carlo. Tests compare library output
// against these.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "raid/geometry.hpp"

namespace raid::testing {

using geometry::Point2;
using geometry::Ring;

inline constexpr double kPi = 3.14159265358979323846;

/// Portable uniform doubles in [0, 1).
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double range(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }

 private:
  std::mt19937_64 engine_;
};

inline double shoelace(const Ring& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto& a = r[i];
    const auto& b = r[(i + 1) % r.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

/// Centroid by a triangle fan from the first vertex.
inline Point2 fan_centroid(const Ring& r) {
  double A = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 1; i + 1 < r.size(); ++i) {
    const Point2 a = r[0], b = r[i], c = r[i + 1];
    const double t = 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    A += t;
    cx += t * (a.x + b.x + c.x) / 3.0;
    cy += t * (a.y + b.y + c.y) / 3.0;
  }
  return {cx / A, cy / A};
}

/// Crossing-number test over any set of rings (even-odd rule).
inline bool inside_even_odd(const std::vector<Ring>& rings, Point2 q) {
  bool in = false;
  for (const auto& r : rings) {
    for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
      const Point2 a = r[i], b = r[j];
      if ((a.y > q.y) != (b.y > q.y)) {
        const double x = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (q.x < x) in = !in;
      }
    }
  }
  return in;
}

inline std::vector<Ring> rings_of(const geometry::PolygonSet& p) {
  std::vector<Ring> out;
  for (const auto& poly : p.polygons()) {
    out.push_back(poly.outer);
    for (const auto& h : poly.holes) out.push_back(h);
  }
  return out;
}

/// Even-odd area by point sampling at cell centers of an n x n raster
/// over the bounding box.
inline double raster_area(const std::vector<Ring>& rings, int n) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto& r : rings) {
    for (const auto& p : r) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
  }
  const double dx = (x1 - x0) / n, dy = (y1 - y0) / n;
  long long hits = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      hits += inside_even_odd(rings, {x0 + (i + 0.5) * dx, y0 + (j + 0.5) * dy});
    }
  }
  return hits * dx * dy;
}

/// Convex polygon: n points at sorted random angles on a rotated ellipse.
inline Ring random_convex(TestRng& g, Point2 c, double rx, double ry, int n) {
  std::vector<double> angles;
  for (int i = 0; i < n; ++i) angles.push_back(g.range(0.0, 2.0 * kPi));
  std::sort(angles.begin(), angles.end());
  const double rot = g.range(0.0, kPi);
  Ring r;
  for (double a : angles) {
    const double x = rx * std::cos(a), y = ry * std::sin(a);
    r.push_back({c.x + x * std::cos(rot) - y * std::sin(rot), c.y + x * std::sin(rot) + y * std::cos(rot)});
  }
  // Drop near-duplicate angles that would give a sliver.
  if (std::abs(shoelace(r)) < 1e-6 * rx * ry) return random_convex(g, c, rx, ry, n);
  return r;
}

/// Vertices of polygonized polar bin (i, j) around s: bins centered on +x,
/// counterclockwise, chords at ceil(arc_segments / A) per bin, radial edges
/// j / R and (j + 1) / R of r_max.
inline Ring bin_polygon(Point2 s, int i, int j, int A, int R, int arc_segments, double r_max) {
  const int m = static_cast<int>(std::ceil(static_cast<double>(arc_segments) / A - 1e-9));
  const double span = 2.0 * kPi / A;
  const double lo = -kPi / A + span * i;
  const double r_lo = r_max * j / R, r_hi = r_max * (j + 1) / R;
  Ring out;
  if (j == 0) out.push_back(s);
  for (int k = 0; k <= m; ++k) {
    const double a = lo + span * k / m;
    out.push_back({s.x + r_hi * std::cos(a), s.y + r_hi * std::sin(a)});
  }
  if (j > 0) {
    for (int k = m; k >= 0; --k) {
      const double a = lo + span * k / m;
      out.push_back({s.x + r_lo * std::cos(a), s.y + r_lo * std::sin(a)});
    }
  }
  return out;
}

struct McEstimate {
  double value = 0.0;
  /// Binomial standard error with the (hits + 1/2) / (n + 1) floor, so that
  /// zero-variance outcomes still get a nonzero error bar.
  double standard_error = 0.0;
};

/// Fraction of the bin polygon covered by target, from n uniform samples
/// inside the bin (bounding-box rejection).
inline McEstimate mc_fraction(const Ring& bin, const std::vector<Ring>& target, long n, TestRng& g) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto& p : bin) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  const std::vector<Ring> bin_rings{bin};
  long taken = 0, hits = 0;
  while (taken < n) {
    const Point2 q{g.range(x0, x1), g.range(y0, y1)};
    if (!inside_even_odd(bin_rings, q)) continue;
    ++taken;
    hits += inside_even_odd(target, q);
  }
  McEstimate e;
  e.value = static_cast<double>(hits) / n;
  const double p = (hits + 0.5) / (n + 1.0);
  e.standard_error = std::sqrt(p * (1.0 - p) / n);
  return e;
}

/// Monte-Carlo point histogram, bins [i * R + j].
inline std::vector<McEstimate> mc_point_histogram(Point2 s, const std::vector<Ring>& target, double r_max,
                                                  int A, int R, int arc_segments, long n, TestRng& g) {
  std::vector<McEstimate> out;
  for (int i = 0; i < A; ++i) {
    for (int j = 0; j < R; ++j) out.push_back(mc_fraction(bin_polygon(s, i, j, A, R, arc_segments, r_max), target, n, g));
  }
  return out;
}

/// Stratified (jittered-grid) Monte-Carlo coverage of the bin: one uniform
/// point per cell of an m x m grid over the bin's bounding box, kept when it
/// falls inside the bin. Far lower variance than plain sampling.
inline double stratified_fraction(const Ring& bin, const std::vector<Ring>& target, int m, TestRng& g) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto& p : bin) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  const std::vector<Ring> bin_rings{bin};
  long in = 0, hits = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const Point2 q{x0 + (i + g.uniform()) * (x1 - x0) / m, y0 + (j + g.uniform()) * (y1 - y0) / m};
      if (!inside_even_odd(bin_rings, q)) continue;
      ++in;
      hits += inside_even_odd(target, q);
    }
  }
  return in == 0 ? 0.0 : static_cast<double>(hits) / in;
}

/// Brute-force unnormalized sampled descriptor, written from the definitions
/// alone: grid of pitch sqrt(image_area / density) through the centroid, exact
/// annular-sector areas and centroids for the outer bins, unit-peak Gaussian
/// weights with 2 pi sigma^2 = bin area, nearest-sample fallback below
/// weight_floor. hist(s, r_max) supplies the A * R point histogram at s.
/// Output layout [i][j][k][l].
template <typename Hist>
std::vector<double> brute_force_descriptor(const Ring& source, double image_area, double density, int A, int R,
                                           int K, int L, double weight_floor, Hist&& hist) {
  const Point2 c = fan_centroid(source);
  double r_max = 0.0;
  for (const auto& p : source) r_max = std::max(r_max, std::hypot(p.x - c.x, p.y - c.y));
  const double h = std::sqrt(image_area / density);
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto& p : source) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  std::vector<Point2> pts;
  for (long i = static_cast<long>(std::floor((x0 - c.x) / h)) - 1; i <= static_cast<long>(std::ceil((x1 - c.x) / h)) + 1;
       ++i) {
    for (long j = static_cast<long>(std::floor((y0 - c.y) / h)) - 1;
         j <= static_cast<long>(std::ceil((y1 - c.y) / h)) + 1; ++j) {
      const Point2 q{c.x + i * h, c.y + j * h};
      if (inside_even_odd({source}, q)) pts.push_back(q);
    }
  }
  std::vector<std::vector<double>> hs;
  for (const auto& q : pts) hs.push_back(hist(q, r_max));
  const int nb = A * R, no = K * L;
  std::vector<double> out(static_cast<std::size_t>(nb * no), 0.0);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      const double span = 2.0 * kPi / K;
      const double lo = -kPi / K + span * k;
      const double r1 = r_max * l / L, r2 = r_max * (l + 1) / L;
      const double a = 0.5 * span * (r2 * r2 - r1 * r1);
      const double rc = 4.0 * (r2 * r2 * r2 - r1 * r1 * r1) * std::sin(span / 2) / (3.0 * (r2 * r2 - r1 * r1) * span);
      const Point2 b{c.x + rc * std::cos(lo + span / 2), c.y + rc * std::sin(lo + span / 2)};
      const double sigma2 = a / (2.0 * kPi);
      double ws = 0.0, best = 1e300;
      std::size_t nearest = 0;
      std::vector<double> acc(static_cast<std::size_t>(nb), 0.0);
      for (std::size_t q = 0; q < pts.size(); ++q) {
        const double d2 = (pts[q].x - b.x) * (pts[q].x - b.x) + (pts[q].y - b.y) * (pts[q].y - b.y);
        if (d2 < best) {
          best = d2;
          nearest = q;
        }
        const double w = std::exp(-d2 / (2.0 * sigma2));
        ws += w;
        for (int m = 0; m < nb; ++m) acc[m] += w * hs[q][m];
      }
      for (int m = 0; m < nb; ++m) {
        out[static_cast<std::size_t>(m * no + k * L + l)] = ws < weight_floor ? hs[nearest][m] : acc[m] / ws;
      }
    }
  }
  return out;
}

}  // namespace raid::testing
