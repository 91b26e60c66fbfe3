#include "raid/synthetic.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <random>

#include "raid/baseline.hpp"
#include "raid/error.hpp"

namespace raid::synthetic {

using geometry::kPi;
using geometry::Point2;
using geometry::Polygon;
using geometry::PolygonSet;
using geometry::Ring;

const std::vector<std::string>& design_names() {
  static const std::vector<std::string> names = {
      "surrounded", "surrounding", "between", "bridging", "arching_over",
      "crossing",   "hanging",     "rising",  "riding",   "none"};
  return names;
}

const std::vector<std::string>& relationship_classes() {
  static const std::vector<std::string> names(design_names().begin(), design_names().end() - 1);
  return names;
}

PolygonSet SyntheticPair::target() const {
  return target_parts.size() == 1 ? target_parts.front() : geometry::unite(target_parts);
}

namespace {

constexpr int kSegments = 48;
constexpr int kMaxAttempts = 200;

// Portable uniform doubles: the 53 high bits of mt19937_64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double range(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool coin() { return uniform() < 0.5; }

 private:
  std::mt19937_64 engine_;
};

Ring ellipse(Point2 c, double rx, double ry, int segments = kSegments) {
  Ring r;
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * kPi * i / segments;
    r.push_back({c.x + rx * std::cos(a), c.y + ry * std::sin(a)});
  }
  return r;
}

// Ellipse with a smooth random radial wobble of relative size up to rough.
Ring blob(Point2 c, double rx, double ry, double rough, Rng& g) {
  double amp[3], phase[3];
  for (int h = 0; h < 3; ++h) {
    amp[h] = rough * g.range(0.0, 1.0) / (h + 1);
    phase[h] = g.range(0.0, 2.0 * kPi);
  }
  Ring r;
  for (int i = 0; i < kSegments; ++i) {
    const double a = 2.0 * kPi * i / kSegments;
    double f = 1.0;
    for (int h = 0; h < 3; ++h) f += amp[h] * std::sin((h + 2) * a + phase[h]);
    r.push_back({c.x + f * rx * std::cos(a), c.y + f * ry * std::sin(a)});
  }
  return r;
}

Ring rect(Point2 c, double w, double h) {
  return {{c.x - w / 2, c.y - h / 2}, {c.x + w / 2, c.y - h / 2},
          {c.x + w / 2, c.y + h / 2}, {c.x - w / 2, c.y + h / 2}};
}

// Band between two concentric ellipses over the angles [a0, a1].
Ring band(Point2 c, double rx_in, double ry_in, double rx_out, double ry_out, double a0,
          double a1) {
  const int n = std::max(4, static_cast<int>(kSegments * (a1 - a0) / (2.0 * kPi)));
  Ring r;
  for (int i = 0; i <= n; ++i) {
    const double a = a0 + (a1 - a0) * i / n;
    r.push_back({c.x + rx_out * std::cos(a), c.y + ry_out * std::sin(a)});
  }
  for (int i = n; i >= 0; --i) {
    const double a = a0 + (a1 - a0) * i / n;
    r.push_back({c.x + rx_in * std::cos(a), c.y + ry_in * std::sin(a)});
  }
  return r;
}

Ring rotated(const Ring& r, double angle, Point2 about = {}) {
  const double c = std::cos(angle), s = std::sin(angle);
  Ring out;
  for (const auto& p : r) {
    const Point2 d = p - about;
    out.push_back({about.x + c * d.x - s * d.y, about.y + s * d.x + c * d.y});
  }
  return out;
}

struct Layout {
  std::vector<Polygon> source;
  std::vector<std::vector<Polygon>> targets;
  /// Orientation-free relationships are placed at any angle; the others
  /// keep "up" within a small tilt.
  bool any_angle = false;
};

Polygon poly(Ring outer, std::vector<Ring> holes = {}) { return {std::move(outer), std::move(holes)}; }

// Closed ring, or a C-shaped band with an opening of up to max_gap radians.
Polygon ring_or_band(Point2 c, double rx_in, double ry_in, double rx_out, double ry_out,
                     double max_gap, Rng& g) {
  if (g.coin()) return poly(ellipse(c, rx_out, ry_out), {ellipse(c, rx_in, ry_in)});
  const double gap = g.range(0.2, 1.0) * max_gap;
  const double a0 = g.range(0.0, 2.0 * kPi);
  return poly(band(c, rx_in, ry_in, rx_out, ry_out, a0 + gap / 2, a0 + 2.0 * kPi - gap / 2));
}

Ring blob_or_rect(Point2 c, double w, double h, Rng& g) {
  return g.coin() ? blob(c, w / 2, h / 2, 0.12, g) : rect(c, w, h);
}

// Shapes are built around the origin, then rotated and moved into the frame.
Layout design(std::string_view name, Rng& g) {
  Layout L;
  if (name == "surrounded") {
    const double rx = g.range(14, 28);
    const double ry = rx * g.range(0.45, 0.75);
    const double gap = g.range(0.15, 0.8) * (rx - ry);
    const double t = rx * g.range(0.3, 0.8);
    L.source.push_back(poly(ellipse({0, 0}, rx, ry)));
    L.targets.push_back({ring_or_band({0, 0}, rx + gap, ry + gap, rx + gap + t, ry + gap + t,
                                      kPi / 3, g)});
    L.any_angle = true;
  } else if (name == "surrounding") {
    const double ax = g.range(16, 30);
    const double ay = ax * g.range(0.6, 1.0);
    if (g.coin()) {
      const double t = ax * g.range(0.25, 0.6);
      L.source.push_back(ring_or_band({0, 0}, ax, ay, ax + t, ay + t, kPi / 3, g));
    } else {
      // Separate pieces around the target, like chairs around a table.
      const int pieces = 3 + static_cast<int>(g.range(0, 4));
      const double a0 = g.range(0, 2 * kPi);
      const double pr = ax * g.range(0.2, 0.3);
      for (int i = 0; i < pieces; ++i) {
        const double a = a0 + 2 * kPi * (i + g.range(-0.15, 0.15)) / pieces;
        const Point2 c{(ax + pr) * std::cos(a), (ay + pr) * std::sin(a)};
        L.source.push_back(poly(rotated(blob_or_rect(c, 2 * pr, 2 * pr * g.range(0.6, 1.0), g),
                                        a, c)));
      }
    }
    // Radii up to 0.64 and offsets up to 0.15 of the hole keep the blob inside.
    const double f = g.range(0.32, 0.64);
    const Point2 off{g.range(-0.15, 0.15) * ax, g.range(-0.15, 0.15) * ay};
    L.targets.push_back({poly(blob(off, ax * f, ay * f * g.range(0.5, 1.0), 0.1, g))});
    L.any_angle = true;
  } else if (name == "between") {
    const double ry = g.range(24, 38);
    const double rx = ry * g.range(0.25, 0.5);
    L.source.push_back(poly(blob({0, 0}, rx, ry, 0.1, g)));
    for (double side : {-1.0, 1.0}) {
      const double gap = ry * g.range(0.05, 0.35);
      const double br = ry * g.range(0.35, 0.7);
      const double cx = side * (rx + gap + br);
      L.targets.push_back({poly(blob({cx, g.range(-0.3, 0.3) * ry}, br, br * g.range(0.7, 1.3), 0.12, g))});
    }
    L.any_angle = true;
  } else if (name == "bridging") {
    const double w = g.range(80, 140);
    const double h = g.range(8, 16);
    L.source.push_back(poly(rect({0, 0}, w, h)));
    for (double side : {-1.0, 1.0}) {
      const double pw = g.range(10, 20);
      const double ph = g.range(30, 60);
      const double cx = side * (w / 2 - pw / 2 - g.range(0, 0.15) * w);
      const double top = -h / 2 - g.range(0, 2);
      L.targets.push_back({poly(rect({cx, top - ph / 2}, pw, ph))});
    }
  } else if (name == "arching_over") {
    const double r_in = g.range(24, 40);
    const double aspect = g.range(0.7, 1.2);
    const double t = g.range(6, 14);
    const double lift = g.range(-0.3, 0.25);
    L.source.push_back(poly(band({0, 0}, r_in, r_in * aspect, r_in + t, (r_in + t) * aspect,
                                 -lift, kPi + lift)));
    const double br = r_in * g.range(0.35, 0.7);
    const double by = br * g.range(0.3, 0.8);
    L.targets.push_back({poly(blob({g.range(-0.2, 0.2) * (r_in - br), by * 0.8}, br, by, 0.1, g))});
  } else if (name == "crossing") {
    const double w = g.range(70, 130);
    const double h = g.range(8, 16);
    L.source.push_back(poly(blob_or_rect({0, 0}, w, h, g)));
    const double th = g.range(70, 130);
    const double tw = g.range(8, 16);
    const Point2 at{g.range(-0.6, 0.6) * w / 2, 0.0};
    const double tilt = kPi / 2 + g.range(-0.5, 0.5);
    L.targets.push_back({poly(rotated(blob_or_rect(at + Point2{0, g.range(-0.5, 0.5) * th / 2}, tw, th, g),
                                      tilt - kPi / 2, at))});
    L.any_angle = true;
  } else if (name == "hanging" || name == "rising") {
    // Hanging: source below a horizontal bar, touching it. Rising mirrors it.
    const double bw = g.range(60, 120);
    const double bh = g.range(8, 14);
    const double sw = g.range(10, 22);
    const double sh = g.range(30, 60);
    const double sx = g.range(-0.35, 0.35) * bw;
    const double sign = name == "hanging" ? 1.0 : -1.0;
    L.targets.push_back({poly(rect({0, sign * bh / 2}, bw, bh))});
    // Overlap the bar by a pixel or two so the source stays attached.
    L.source.push_back(poly(blob_or_rect({sx, -sign * (sh / 2 - g.range(0.5, 2.0))}, sw, sh, g)));
  } else if (name == "riding") {
    const double trx = g.range(30, 45);
    const double try_ = g.range(14, 24);
    L.targets.push_back({poly(blob({0, 0}, trx, try_, 0.1, g))});
    const double srx = g.range(7, 13);
    const double sry = g.range(14, 24);
    const double sx = g.range(-0.4, 0.4) * trx;
    const double top = try_ * std::sqrt(std::max(0.0, 1.0 - (sx / trx) * (sx / trx)));
    L.source.push_back(poly(blob({sx, top + sry * g.range(0.4, 0.8)}, srx, sry, 0.1, g)));
  } else if (name == "none") {
    const double rs = g.range(10, 30);
    const double rt = g.range(10, 30);
    L.source.push_back(poly(blob_or_rect({0, 0}, 2 * rs, 2 * rs * g.range(0.3, 1.0), g)));
    const double a = g.range(0, 2 * kPi);
    const double d = (rs + rt) * g.range(0.6, 1.5);
    L.targets.push_back({poly(blob_or_rect({d * std::cos(a), d * std::sin(a)}, 2 * rt,
                                           2 * rt * g.range(0.3, 1.0), g))});
    L.any_angle = true;
  } else {
    throw Error(ErrorCode::BadRequest, fmt::format("unknown synthetic design '{}'", name));
  }
  return L;
}

Ring place(const Ring& r, double angle, Point2 center) {
  const double c = std::cos(angle), s = std::sin(angle);
  Ring out;
  out.reserve(r.size());
  for (const auto& p : r) out.push_back({center.x + c * p.x - s * p.y, center.y + s * p.x + c * p.y});
  return out;
}

PolygonSet place(const std::vector<Polygon>& polys, double angle, Point2 center) {
  std::vector<Polygon> out;
  for (const auto& p : polys) {
    Polygon q{place(p.outer, angle, center), {}};
    for (const auto& h : p.holes) q.holes.push_back(place(h, angle, center));
    out.push_back(std::move(q));
  }
  return PolygonSet(std::move(out));
}

bool inside_frame(const PolygonSet& p) {
  const auto b = p.bounds();
  return b.min_x >= 1.0 && b.min_y >= 1.0 && b.max_x <= kFrameSize - 1.0 &&
         b.max_y <= kFrameSize - 1.0;
}

bool admissible(const SyntheticPair& pair) {
  const descriptor::ImageFrame frame{kFrameSize, kFrameSize};
  if (!inside_frame(pair.source)) return false;
  for (const auto& t : pair.target_parts) {
    if (!inside_frame(t)) return false;
  }
  try {
    const auto target = pair.target();
    descriptor::raid(pair.source, target, frame);
    baseline::shape_context(pair.source, target);
  } catch (const Error&) {
    return false;
  }
  return true;
}

}  // namespace

std::vector<SyntheticPair> generate_synthetic(std::string_view name, int count, std::uint64_t seed) {
  if (count < 0) throw Error(ErrorCode::BadRequest, "count must be non-negative");
  bool known = false;
  for (const auto& d : design_names()) known = known || d == name;
  if (!known) throw Error(ErrorCode::BadRequest, fmt::format("unknown synthetic design '{}'", name));

  Rng g(seed);
  std::vector<SyntheticPair> out;
  while (static_cast<int>(out.size()) < count) {
    bool done = false;
    for (int attempt = 0; attempt < kMaxAttempts && !done; ++attempt) {
      const Layout L = design(name, g);
      const double angle =
          L.any_angle ? g.range(0.0, 2.0 * kPi) : g.range(-15.0, 15.0) * kPi / 180.0;
      const Point2 center{kFrameSize / 2 + g.range(-25, 25), kFrameSize / 2 + g.range(-25, 25)};
      SyntheticPair pair;
      pair.source = place(L.source, angle, center);
      for (const auto& t : L.targets) pair.target_parts.push_back(place(t, angle, center));
      if (name != "none") pair.classes.insert(std::string(name));
      if (admissible(pair)) {
        out.push_back(std::move(pair));
        done = true;
      }
    }
    if (!done) throw Error(ErrorCode::BadRequest, fmt::format("cannot generate a valid '{}' pair", name));
  }
  return out;
}

SyntheticDataset build_synthetic(const std::vector<std::string>& designs, int per_design,
                                 std::uint64_t seed) {
  SyntheticDataset s;
  s.data.categories = {"source", "target"};
  int image = 0;
  for (std::size_t d = 0; d < designs.size(); ++d) {
    for (auto& pair : generate_synthetic(designs[d], per_design, seed + d)) {
      dataset::ImageRecord rec;
      rec.image_id = std::to_string(++image);
      rec.width = static_cast<int>(kFrameSize);
      rec.height = static_cast<int>(kFrameSize);
      rec.regions.push_back({"1", "source", std::move(pair.source)});
      int part = 1;
      for (auto& t : pair.target_parts) {
        rec.regions.push_back({std::to_string(++part), "target", std::move(t)});
      }
      s.labels.push_back({rec.image_id, "1", "target", pair.classes});
      s.data.images.push_back(std::move(rec));
    }
  }
  s.data.digest = dataset::fnv1a_hex(dataset::format_annotations(s.data));
  return s;
}

void write_synthetic(const SyntheticDataset& s, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory " + dir.string() + ": " + ec.message());
  dataset::write_annotations(s.data, dir / "annotations.json");
  std::ofstream out(dir / "labels.json", std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / "labels.json").string());
  out << classifier::format_labels(s.labels);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / "labels.json").string());
}

}  // namespace raid::synthetic
