// Exact planar overlay on polygon rings.
//
// The input rings are cut into an arrangement: every edge is split at
// crossings, touching vertices and collinear overlaps. Each piece carries the
// set of operands whose boundary it belongs to (an operand covering it an
// even number of times drops out). For the side just left of a piece the
// operands containing it are found by an even-odd ray cast; the piece is kept
// when the result predicate differs across it, oriented with the result on
// its left. The boundary is then traced so that inside corners meeting at a
// node stay separate, and closed walks are split at repeated nodes into
// simple rings: counterclockwise rings are outers, clockwise rings are holes
// of the smallest outer around them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include "raid/error.hpp"
#include "raid/geometry.hpp"

namespace raid::geometry {

namespace {

constexpr double kParamSnap = 1e-12;

Ring clean_ring(const Ring& raw) {
  Ring out;
  out.reserve(raw.size());
  for (const auto& p : raw) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::InvalidPolygon, "ring has non-finite coordinates");
    }
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  }
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

double snap(double t) {
  if (t < kParamSnap) return 0.0;
  if (t > 1.0 - kParamSnap) return 1.0;
  return t;
}

bool ring_contains(const Ring& r, Point2 q) {
  bool inside = false;
  for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
    const Point2 a = r[j];
    const Point2 b = r[i];
    if ((a.y <= q.y) != (b.y <= q.y)) {
      const double x = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (q.x < x) inside = !inside;
    }
  }
  return inside;
}

class Arrangement {
 public:
  using Mask = std::uint64_t;
  static constexpr std::size_t kMaxOperands = 64;

  struct Input {
    const Ring* ring;
    std::size_t operand;
  };

  Arrangement(const std::vector<Input>& rings, const std::function<bool(Mask)>& keep) {
    double extent = 0.0;
    for (const auto& in : rings) {
      for (const auto& p : *in.ring) extent = std::max({extent, std::abs(p.x), std::abs(p.y)});
    }
    snap_tol_ = kSnapRelative * std::max(extent, 1e-300);
    for (const auto& in : rings) {
      const Ring& ring = *in.ring;
      const Mask bit = Mask{1} << in.operand;
      for (std::size_t i = 0; i < ring.size(); ++i) {
        const int a = node_for(ring[i]);
        const int b = node_for(ring[(i + 1) % ring.size()]);
        if (a != b) edges_.push_back({a, b, bit});
      }
    }
    splits_.resize(edges_.size());
    split_edges();
    build_segments();
    std::vector<Edge> kept;
    for (std::size_t k = 0; k < segments_.size(); ++k) {
      const Mask left = left_mask(k);
      const bool in_left = keep(left);
      if (in_left == keep(left ^ segments_[k].mask)) continue;
      Edge e = segments_[k];
      if (!in_left) std::swap(e.from, e.to);
      kept.push_back(e);
    }
    segments_ = std::move(kept);
  }

  std::vector<Polygon> polygons() const {
    std::vector<Ring> outers;
    std::vector<Ring> holes;
    for (const auto& walk : trace()) split_walk(walk, outers, holes);

    std::vector<double> outer_area(outers.size());
    std::vector<Polygon> polys(outers.size());
    for (std::size_t i = 0; i < outers.size(); ++i) {
      outer_area[i] = signed_ring_area(outers[i]);
      polys[i].outer = outers[i];
    }
    for (auto& h : holes) {
      const double ha = -signed_ring_area(h);
      const Point2 probe = 0.5 * (h[0] + h[1]);
      long best = -1;
      for (std::size_t i = 0; i < outers.size(); ++i) {
        if (outer_area[i] <= ha || !ring_contains(outers[i], probe)) continue;
        if (best < 0 || outer_area[i] < outer_area[static_cast<std::size_t>(best)]) {
          best = static_cast<long>(i);
        }
      }
      if (best >= 0) polys[static_cast<std::size_t>(best)].holes.push_back(std::move(h));
    }
    return polys;
  }

 private:
  struct Edge {
    int from;
    int to;
    Mask mask;
  };

  // Nodes closer than snap_tol_ are merged, so one crossing computed from
  // several edge pairs yields a single node.
  int node_for(Point2 p) {
    const auto cx = static_cast<long long>(std::floor(p.x / snap_tol_));
    const auto cy = static_cast<long long>(std::floor(p.y / snap_tol_));
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = grid_.find({cx + dx, cy + dy});
        if (it == grid_.end()) continue;
        for (int id : it->second) {
          const Point2 q = at(id);
          if (std::abs(q.x - p.x) <= snap_tol_ && std::abs(q.y - p.y) <= snap_tol_) return id;
        }
      }
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(p);
    grid_[{cx, cy}].push_back(id);
    return id;
  }

  Point2 at(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

  void add_split(std::size_t e, double t, int id) {
    if (t > 0.0 && t < 1.0 && id != edges_[e].from && id != edges_[e].to) {
      splits_[e].emplace_back(t, id);
    }
  }

  // Parameter of p along edge e, for p on the edge's line.
  double param(std::size_t e, Point2 p) const {
    const Point2 a = at(edges_[e].from);
    const Point2 d = at(edges_[e].to) - a;
    return dot(p - a, d) / dot(d, d);
  }

  void split_edges() {
    const std::size_t m = edges_.size();
    std::vector<Bounds> box(m);
    for (std::size_t e = 0; e < m; ++e) {
      const Point2 a = at(edges_[e].from);
      const Point2 b = at(edges_[e].to);
      box[e] = {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x),
                std::max(a.y, b.y)};
    }
    for (std::size_t e = 0; e < m; ++e) {
      const Point2 a = at(edges_[e].from);
      const Point2 ea = at(edges_[e].to) - a;
      for (std::size_t f = e + 1; f < m; ++f) {
        if (box[f].min_x > box[e].max_x || box[f].max_x < box[e].min_x ||
            box[f].min_y > box[e].max_y || box[f].max_y < box[e].min_y) {
          continue;
        }
        const Point2 b = at(edges_[f].from);
        const Point2 eb = at(edges_[f].to) - b;
        const double d = cross(ea, eb);
        const double la = norm(ea);
        const double lb = norm(eb);
        const bool shared = edges_[e].from == edges_[f].from || edges_[e].from == edges_[f].to ||
                            edges_[e].to == edges_[f].from || edges_[e].to == edges_[f].to;
        if (std::abs(d) <= kParallel * la * lb || shared) {
          // Parallel, or meeting at a common node: only a collinear overlap
          // adds splits.
          const double off1 = std::abs(cross(b - a, ea)) / la;
          const double off2 = std::abs(cross(b + eb - a, ea)) / la;
          if (off1 > snap_tol_ || off2 > snap_tol_) continue;
          add_split(e, param(e, b), edges_[f].from);
          add_split(e, param(e, b + eb), edges_[f].to);
          add_split(f, param(f, a), edges_[e].from);
          add_split(f, param(f, a + ea), edges_[e].to);
          continue;
        }
        double t = cross(b - a, eb) / d;
        double u = cross(b - a, ea) / d;
        if (t < -kParamSnap || t > 1.0 + kParamSnap || u < -kParamSnap ||
            u > 1.0 + kParamSnap) {
          continue;
        }
        t = snap(t);
        u = snap(u);
        int id;
        if (t == 0.0) {
          id = edges_[e].from;
        } else if (t == 1.0) {
          id = edges_[e].to;
        } else if (u == 0.0) {
          id = edges_[f].from;
        } else if (u == 1.0) {
          id = edges_[f].to;
        } else {
          id = node_for(a + t * ea);
        }
        add_split(e, t, id);
        add_split(f, u, id);
      }
    }
  }

  void build_segments() {
    std::map<std::pair<int, int>, Mask> cover;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      auto& s = splits_[e];
      std::sort(s.begin(), s.end());
      int prev = edges_[e].from;
      auto add = [&](int id) {
        if (id == prev) return;
        cover[{std::min(prev, id), std::max(prev, id)}] ^= edges_[e].mask;
        prev = id;
      };
      for (const auto& [t, id] : s) add(id);
      add(edges_[e].to);
    }
    for (const auto& [key, mask] : cover) {
      if (mask != 0) segments_.push_back({key.first, key.second, mask});
    }
  }

  // Operands containing the side just left of segment k: a ray from its
  // midpoint, along the axis closer to its normal, against every other
  // segment.
  Mask left_mask(std::size_t k) const {
    const Point2 u = at(segments_[k].from);
    const Point2 v = at(segments_[k].to);
    const Point2 m = 0.5 * (u + v);
    const Point2 d = v - u;
    const bool horizontal_ray = std::abs(d.y) >= std::abs(d.x);
    // With x and y swapped for the vertical ray, left of d is -x when d
    // points up and +x when it points down.
    const bool toward_negative = horizontal_ray ? d.y > 0.0 : d.x < 0.0;
    Mask inside = 0;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      if (i == k) continue;
      Point2 a = at(segments_[i].from);
      Point2 b = at(segments_[i].to);
      Point2 q = m;
      if (!horizontal_ray) {
        std::swap(a.x, a.y);
        std::swap(b.x, b.y);
        std::swap(q.x, q.y);
      }
      if ((a.y <= q.y) == (b.y <= q.y)) continue;
      const double x = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (toward_negative ? x < q.x : x > q.x) inside ^= segments_[i].mask;
    }
    return inside;
  }

  // Closed boundary walks. Arriving at a node, a walk leaves along the first
  // outgoing segment clockwise from the one it came in on, which keeps the
  // inside on the left and never joins two inside corners.
  std::vector<std::vector<int>> trace() const {
    struct Branch {
      double angle;
      bool incoming;
      std::size_t segment;
    };
    std::vector<std::vector<Branch>> star(nodes_.size());
    for (std::size_t k = 0; k < segments_.size(); ++k) {
      const Point2 u = at(segments_[k].from);
      const Point2 v = at(segments_[k].to);
      star[static_cast<std::size_t>(segments_[k].from)].push_back(
          {std::atan2(v.y - u.y, v.x - u.x), false, k});
      star[static_cast<std::size_t>(segments_[k].to)].push_back(
          {std::atan2(u.y - v.y, u.x - v.x), true, k});
    }
    std::vector<std::size_t> next(segments_.size(), segments_.size());
    for (auto& branches : star) {
      std::sort(branches.begin(), branches.end(),
                [](const Branch& a, const Branch& b) { return a.angle < b.angle; });
      const std::size_t n = branches.size();
      std::vector<bool> taken(n, false);
      for (std::size_t i = 0; i < n; ++i) {
        if (!branches[i].incoming) continue;
        for (std::size_t step = 1; step < n; ++step) {
          const std::size_t j = (i + n - step) % n;
          if (branches[j].incoming || taken[j]) continue;
          taken[j] = true;
          next[branches[i].segment] = branches[j].segment;
          break;
        }
      }
    }

    std::vector<std::vector<int>> walks;
    std::vector<bool> seen(segments_.size(), false);
    for (std::size_t k0 = 0; k0 < segments_.size(); ++k0) {
      if (seen[k0]) continue;
      std::vector<int> walk;
      std::size_t k = k0;
      while (k < segments_.size() && !seen[k]) {
        seen[k] = true;
        walk.push_back(segments_[k].from);
        k = next[k];
      }
      if (k == k0 && walk.size() >= 3) walks.push_back(std::move(walk));
    }
    return walks;
  }

  // Splits a closed walk at repeated nodes into simple rings.
  void split_walk(const std::vector<int>& walk, std::vector<Ring>& outers,
                  std::vector<Ring>& holes) const {
    std::vector<int> stack;
    std::map<int, std::size_t> pos;
    auto emit = [&](std::size_t from) {
      Ring r;
      for (std::size_t i = from; i < stack.size(); ++i) r.push_back(at(stack[i]));
      const double a = signed_ring_area(r);
      if (a > 0.0) outers.push_back(std::move(r));
      else if (a < 0.0) holes.push_back(std::move(r));
    };
    for (std::size_t i = 0; i <= walk.size(); ++i) {
      const int id = walk[i % walk.size()];
      if (auto it = pos.find(id); it != pos.end()) {
        const std::size_t p = it->second;
        emit(p);
        for (std::size_t j = p + 1; j < stack.size(); ++j) pos.erase(stack[j]);
        stack.resize(p + 1);
        continue;
      }
      pos[id] = stack.size();
      stack.push_back(id);
    }
  }

  static constexpr double kSnapRelative = 1e-11;
  static constexpr double kParallel = 1e-12;

  double snap_tol_ = 0.0;
  std::map<std::pair<long long, long long>, std::vector<int>> grid_;
  std::vector<Point2> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<double, int>>> splits_;
  std::vector<Edge> segments_;
};

using Mask = Arrangement::Mask;

void add_rings(const PolygonSet& p, std::size_t operand,
               std::vector<Arrangement::Input>& out) {
  for (const auto& poly : p.polygons()) {
    out.push_back({&poly.outer, operand});
    for (const auto& h : poly.holes) out.push_back({&h, operand});
  }
}

PolygonSet overlay(const PolygonSet& a, const PolygonSet& b,
                   const std::function<bool(Mask)>& keep) {
  std::vector<Arrangement::Input> rings;
  add_rings(a, 0, rings);
  add_rings(b, 1, rings);
  return PolygonSet(Arrangement(rings, keep).polygons());
}

bool disjoint_bounds(const PolygonSet& a, const PolygonSet& b) {
  const Bounds ba = a.bounds();
  const Bounds bb = b.bounds();
  return ba.max_x < bb.min_x || bb.max_x < ba.min_x || ba.max_y < bb.min_y ||
         bb.max_y < ba.min_y;
}

}  // namespace

PolygonSet repair(std::span<const Ring> rings) {
  std::vector<Ring> cleaned;
  cleaned.reserve(rings.size());
  for (const auto& raw : rings) {
    Ring ring = clean_ring(raw);
    if (ring.size() < 3) {
      throw Error(ErrorCode::InvalidPolygon, "ring has fewer than 3 distinct vertices");
    }
    cleaned.push_back(std::move(ring));
  }
  std::vector<Arrangement::Input> input;
  for (const auto& r : cleaned) input.push_back({&r, 0});
  return PolygonSet(Arrangement(input, [](Mask m) { return m != 0; }).polygons());
}

PolygonSet repair(const Ring& ring) { return repair(std::span<const Ring>(&ring, 1)); }

PolygonSet intersection(const PolygonSet& a, const PolygonSet& b) {
  if (a.empty() || b.empty() || disjoint_bounds(a, b)) return {};
  return overlay(a, b, [](Mask m) { return m == 3; });
}

double intersection_area(const PolygonSet& a, const PolygonSet& b) {
  return area(intersection(a, b));
}

PolygonSet difference(const PolygonSet& a, const PolygonSet& b) {
  if (a.empty() || b.empty() || disjoint_bounds(a, b)) return a;
  return overlay(a, b, [](Mask m) { return m == 1; });
}

PolygonSet unite(const PolygonSet& a, const PolygonSet& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return overlay(a, b, [](Mask m) { return m != 0; });
}

PolygonSet unite(std::span<const PolygonSet> parts) {
  std::vector<PolygonSet> level(parts.begin(), parts.end());
  std::erase_if(level, [](const PolygonSet& p) { return p.empty(); });
  if (level.empty()) return {};
  // Overlays up to kMaxOperands parts at a time.
  while (level.size() > 1) {
    std::vector<PolygonSet> merged;
    for (std::size_t i = 0; i < level.size(); i += Arrangement::kMaxOperands) {
      const std::size_t end = std::min(level.size(), i + Arrangement::kMaxOperands);
      std::vector<Arrangement::Input> rings;
      for (std::size_t j = i; j < end; ++j) add_rings(level[j], j - i, rings);
      merged.emplace_back(Arrangement(rings, [](Mask m) { return m != 0; }).polygons());
    }
    level = std::move(merged);
  }
  return std::move(level.front());
}

PolygonSet clip_to_bounds(const PolygonSet& p, const Bounds& box) {
  const Bounds b = p.bounds();
  if (b.empty()) return {};
  if (b.min_x >= box.min_x && b.min_y >= box.min_y && b.max_x <= box.max_x &&
      b.max_y <= box.max_y) {
    return p;
  }
  return intersection(p, PolygonSet::rectangle(box.min_x, box.min_y, box.max_x, box.max_y));
}

}  // namespace raid::geometry
