// Point histogram kernel.
//
// Every bin of a point histogram is a difference of two wedges with apex s
// (radius r_j and r_{j-1}), and each wedge is a fan of chord triangles. The
// target area inside a wedge is accumulated edge by edge: for a target edge
// (a, b) the signed triangle (s, a, b) is intersected with every chord cone
// it overlaps. Summed over all rings this gives the winding-weighted area of
// target ∩ wedge, which equals the covered area for a valid polygon set.

#include <algorithm>
#include <cmath>
#include <limits>

#include "raid/descriptor.hpp"
#include "raid/error.hpp"

namespace raid::descriptor {

using geometry::cross;
using geometry::dot;
using geometry::kPi;
using geometry::kTwoPi;

TargetEdges::TargetEdges(const PolygonSet& target) : bounds_(target.bounds()) {
  const std::size_t n = target.vertex_count();
  starts_.reserve(n);
  ends_.reserve(n);
  auto add_ring = [&](const geometry::Ring& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      starts_.push_back(r[i]);
      ends_.push_back(r[(i + 1) % r.size()]);
    }
  };
  for (const auto& poly : target.polygons()) {
    add_ring(poly.outer);
    for (const auto& h : poly.holes) add_ring(h);
  }
}

namespace {

// Sutherland-Hodgman against one axis-aligned half-plane: keeps points with
// sign * coord(p) <= sign * limit.
geometry::Ring clip_half(const geometry::Ring& in, bool use_x, double limit, double sign) {
  geometry::Ring out;
  if (in.empty()) return out;
  auto inside = [&](Point2 p) { return sign * ((use_x ? p.x : p.y) - limit) <= 0.0; };
  for (std::size_t i = 0; i < in.size(); ++i) {
    const Point2 a = in[i];
    const Point2 b = in[(i + 1) % in.size()];
    const bool ia = inside(a);
    const bool ib = inside(b);
    if (ia) out.push_back(a);
    if (ia != ib) {
      const double ca = use_x ? a.x : a.y;
      const double cb = use_x ? b.x : b.y;
      const double t = (limit - ca) / (cb - ca);
      Point2 x = a + t * (b - a);
      (use_x ? x.x : x.y) = limit;
      out.push_back(x);
    }
  }
  return out;
}

}  // namespace

TargetEdges::TargetEdges(const PolygonSet& target, const geometry::Bounds& box) {
  bounds_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  auto add_ring = [&](const geometry::Ring& r) {
    geometry::Ring c = clip_half(r, true, box.min_x, -1.0);
    c = clip_half(c, true, box.max_x, 1.0);
    c = clip_half(c, false, box.min_y, -1.0);
    c = clip_half(c, false, box.max_y, 1.0);
    if (c.size() < 3) return;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Point2 a = c[i];
      const Point2 b = c[(i + 1) % c.size()];
      if (a == b) continue;
      starts_.push_back(a);
      ends_.push_back(b);
      bounds_.min_x = std::min(bounds_.min_x, a.x);
      bounds_.min_y = std::min(bounds_.min_y, a.y);
      bounds_.max_x = std::max(bounds_.max_x, a.x);
      bounds_.max_y = std::max(bounds_.max_y, a.y);
    }
  };
  for (const auto& poly : target.polygons()) {
    add_ring(poly.outer);
    for (const auto& h : poly.holes) add_ring(h);
  }
}

PolarBinning::PolarBinning(int angular_bins, int radial_bins, int arc_segments)
    : angular_bins_(angular_bins), radial_bins_(radial_bins) {
  if (angular_bins < 1 || radial_bins < 1 || arc_segments < 4) {
    throw Error(ErrorCode::BadRequest, "invalid polar bin layout");
  }
  chords_per_bin_ = std::max(
      1, static_cast<int>(std::ceil(static_cast<double>(arc_segments) / angular_bins - 1e-9)));
  chord_count_ = angular_bins_ * chords_per_bin_;
  chord_angle_ = kTwoPi / chord_count_;
  origin_angle_ = -kPi / angular_bins_;
  chord_offset_ = std::cos(0.5 * chord_angle_);

  dirs_.resize(static_cast<std::size_t>(chord_count_) + 1);
  mids_.resize(static_cast<std::size_t>(chord_count_));
  for (int i = 0; i < angular_bins_; ++i) {
    // Same vertex angles as geometry::sector_polygon for bin i.
    const double lo = phi_lo(i);
    const double span = kTwoPi / angular_bins_;
    for (int k = 0; k < chords_per_bin_; ++k) {
      const double a = lo + span * k / chords_per_bin_;
      const double m = lo + span * (k + 0.5) / chords_per_bin_;
      const auto idx = static_cast<std::size_t>(i * chords_per_bin_ + k);
      dirs_[idx] = {std::cos(a), std::sin(a)};
      mids_[idx] = {std::cos(m), std::sin(m)};
    }
  }
  dirs_.back() = dirs_.front();

  const double wedge = 0.5 * chords_per_bin_ * std::sin(chord_angle_);
  radial_norm_.resize(static_cast<std::size_t>(radial_bins_));
  for (int j = 0; j < radial_bins_; ++j) {
    const double lo = radial_edge(j);
    const double hi = radial_edge(j + 1);
    radial_norm_[static_cast<std::size_t>(j)] = wedge * (hi * hi - lo * lo);
  }
}

double PolarBinning::phi_lo(int i) const {
  return origin_angle_ + kTwoPi * i / angular_bins_;
}

namespace {

// Area of the cone between directions d1 and d2 (counterclockwise, less than
// pi apart) bounded by the nearer of the edge line and the chord line. t* are
// the ray parameters at which each direction meets the two lines.
inline double cone_area(geometry::Point2 d1, geometry::Point2 d2, double te1,
                        double te2, double tc1, double tc2) {
  const double base = cross(d1, d2);
  const bool edge_near1 = te1 <= tc1;
  const bool edge_near2 = te2 <= tc2;
  if (edge_near1 && edge_near2) return 0.5 * te1 * te2 * base;
  if (!edge_near1 && !edge_near2) return 0.5 * tc1 * tc2 * base;
  const geometry::Point2 e1 = te1 * d1;
  const geometry::Point2 e2 = te2 * d2;
  const geometry::Point2 c1 = tc1 * d1;
  const geometry::Point2 c2 = tc2 * d2;
  const geometry::Point2 g = c2 - c1;
  const geometry::Point2 f = e2 - e1;
  const double denom = cross(f, g);
  const geometry::Point2 n1 = edge_near1 ? e1 : c1;
  const geometry::Point2 n2 = edge_near2 ? e2 : c2;
  if (denom == 0.0) return 0.5 * cross(n1, n2);
  const double mu = cross(c1 - e1, g) / denom;
  const geometry::Point2 x = e1 + mu * f;
  return 0.5 * (cross(n1, x) + cross(x, n2));
}

}  // namespace

constexpr double kCoverageSnap = 1e-12;

void PolarBinning::evaluate(Point2 s, const TargetEdges& target, double r_max,
                            std::span<double> out) const {
  const auto bins = static_cast<std::size_t>(angular_bins_ * radial_bins_);
  if (out.size() != bins) {
    throw Error(ErrorCode::ConfigMismatch, "point histogram buffer size mismatch");
  }
  std::fill(out.begin(), out.end(), 0.0);
  if (target.empty()) return;

  const auto& b = target.bounds();
  const double dx = std::max({b.min_x - s.x, 0.0, s.x - b.max_x});
  const double dy = std::max({b.min_y - s.y, 0.0, s.y - b.max_y});
  if (dx * dx + dy * dy >= r_max * r_max) return;

  // wedge[i * R + (j - 1)]: target area inside the wedge of bin i at radius
  // edge j (j = 1..R), in absolute units.
  constexpr int kMaxRadial = 16;
  double stack_buf[64 * kMaxRadial];
  std::vector<double> heap_buf;
  double* wedge = stack_buf;
  if (bins > std::size(stack_buf)) {
    heap_buf.assign(bins, 0.0);
    wedge = heap_buf.data();
  } else {
    std::fill(wedge, wedge + bins, 0.0);
  }

  double radii[kMaxRadial + 1];
  std::vector<double> radii_heap;
  double* radius = radii;
  if (radial_bins_ > kMaxRadial) {
    radii_heap.resize(static_cast<std::size_t>(radial_bins_) + 1);
    radius = radii_heap.data();
  }
  for (int j = 1; j <= radial_bins_; ++j) radius[j] = radial_edge(j) * r_max;

  const auto starts = target.starts();
  const auto ends = target.ends();
  const double inv_chord = 1.0 / chord_angle_;
  const double n_chords = static_cast<double>(chord_count_);

  for (std::size_t e = 0; e < starts.size(); ++e) {
    Point2 a = starts[e] - s;
    Point2 c = ends[e] - s;
    double twice = cross(a, c);
    if (twice == 0.0) continue;
    double sign = 1.0;
    if (twice < 0.0) {
      std::swap(a, c);
      twice = -twice;
      sign = -1.0;
    }
    const Point2 edge = c - a;
    const double span = std::atan2(twice, dot(a, c));
    double p = (std::atan2(a.y, a.x) - origin_angle_) * inv_chord;
    p = std::fmod(p, n_chords);
    if (p < 0.0) p += n_chords;
    if (p >= n_chords) p -= n_chords;
    const double q = p + span * inv_chord;
    const auto k0 = static_cast<long>(std::floor(p));
    const auto k1 = std::max(k0, static_cast<long>(std::ceil(q)) - 1);

    for (long k = k0; k <= k1; ++k) {
      const auto kk = static_cast<std::size_t>(k % chord_count_);
      const Point2 d1 = (k == k0) ? a : dirs_[kk];
      const Point2 d2 = (k == k1) ? c : dirs_[kk + 1];
      const double te1 = (k == k0) ? 1.0 : twice / cross(d1, edge);
      const double te2 = (k == k1) ? 1.0 : twice / cross(d2, edge);
      const double cu1 = chord_offset_ / dot(d1, mids_[kk]);
      const double cu2 = chord_offset_ / dot(d2, mids_[kk]);
      const auto bin = static_cast<std::size_t>(kk) / static_cast<std::size_t>(chords_per_bin_);
      double* row = wedge + bin * static_cast<std::size_t>(radial_bins_);
      for (int j = 1; j <= radial_bins_; ++j) {
        row[j - 1] += sign * cone_area(d1, d2, te1, te2, radius[j] * cu1,
                                       radius[j] * cu2);
      }
    }
  }

  const double scale = r_max * r_max;
  for (int i = 0; i < angular_bins_; ++i) {
    const double* row = wedge + static_cast<std::size_t>(i * radial_bins_);
    double inner = 0.0;
    for (int j = 0; j < radial_bins_; ++j) {
      const double covered = row[j] - inner;
      inner = row[j];
      double v = covered / (radial_norm_[static_cast<std::size_t>(j)] * scale);
      // Signed edge contributions cancel to rounding noise in empty or full
      // bins; snap it so such bins are exactly 0 or 1.
      if (v < kCoverageSnap) v = 0.0;
      if (v > 1.0 - kCoverageSnap) v = 1.0;
      out[static_cast<std::size_t>(i * radial_bins_ + j)] = v;
    }
  }
}

PointHistogram point_histogram(Point2 s, const PolygonSet& target, double r_max,
                               const DescriptorConfig& cfg) {
  cfg.validate();
  if (!(r_max > 0.0) || !std::isfinite(r_max)) {
    throw Error(ErrorCode::BadRequest, "r_max must be positive");
  }
  const PolarBinning binning(cfg.angular_bins_point, cfg.radial_bins_point,
                             cfg.arc_segments);
  PointHistogram h;
  h.angular_bins = cfg.angular_bins_point;
  h.radial_bins = cfg.radial_bins_point;
  h.origin = s;
  h.bins.assign(cfg.point_bins(), 0.0);
  binning.evaluate(s, TargetEdges(target), r_max, h.bins);
  return h;
}

}  // namespace raid::descriptor
