#pragma once

#include <array>
#include <atomic>
#include <bit>
#include <cstdint>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "raid/geometry.hpp"

namespace raid::descriptor {

using geometry::Point2;
using geometry::PolygonSet;

/// Bin layout and sampling parameters shared by point histograms and the
/// outer (source-level) histogram.
struct DescriptorConfig {
  int angular_bins_point = 8;
  int radial_bins_point = 2;
  int angular_bins_outer = 8;
  int radial_bins_outer = 2;
  /// Samples per image area; the grid pitch is sqrt(a_I / sample_count_target).
  double sample_count_target = 10000.0;
  int arc_segments = 64;
  double weight_floor = 1e-12;

  void validate() const;
  std::size_t point_bins() const {
    return static_cast<std::size_t>(angular_bins_point * radial_bins_point);
  }
  std::size_t outer_bins() const {
    return static_cast<std::size_t>(angular_bins_outer * radial_bins_outer);
  }
  std::size_t total_bins() const { return point_bins() * outer_bins(); }

  friend bool operator==(const DescriptorConfig&, const DescriptorConfig&) = default;
};

/// Image domain [0, width] x [0, height]; its area sets the sample density.
struct ImageFrame {
  double width = 0.0;
  double height = 0.0;

  double area() const { return width * height; }
  double sample_spacing(const DescriptorConfig& cfg) const;
};

enum class DescriptorKind { Raid, ShapeContext };

std::string_view to_string(DescriptorKind kind);
/// Accepts "raid" and "sc".
DescriptorKind parse_kind(std::string_view s);

/// Extent of each histogram axis, i-major: angular point, radial point,
/// angular outer, radial outer. Baseline descriptors use 1 x 1 outer axes.
using DescriptorShape = std::array<int, 4>;

/// Flattened histogram used for storage and comparison. RAID descriptors are
/// indexed [i][j][k][l]; baseline descriptors [i][j].
struct Descriptor {
  DescriptorKind kind = DescriptorKind::Raid;
  DescriptorShape shape{8, 2, 8, 2};
  std::vector<double> values;
  double r_max = 0.0;

  std::size_t size() const { return values.size(); }
  double sum() const;
  double at(int i, int j, int k = 0, int l = 0) const;
};

/// Covered-area fraction of each polar bin around one origin.
struct PointHistogram {
  int angular_bins = 8;
  int radial_bins = 2;
  Point2 origin;
  std::vector<double> bins;  // [i * radial_bins + j]

  double at(int i, int j) const {
    return bins[static_cast<std::size_t>(i * radial_bins + j)];
  }
};

/// Target polygon edges prepared for repeated point-histogram evaluation.
class TargetEdges {
 public:
  TargetEdges() = default;
  explicit TargetEdges(const PolygonSet& target);
  /// Only the parts of the target inside box. Rings are clipped one by one;
  /// the result keeps winding-weighted coverage exact inside box.
  TargetEdges(const PolygonSet& target, const geometry::Bounds& box);

  bool empty() const { return starts_.empty(); }
  const geometry::Bounds& bounds() const { return bounds_; }
  std::span<const Point2> starts() const { return starts_; }
  std::span<const Point2> ends() const { return ends_; }

 private:
  std::vector<Point2> starts_;
  std::vector<Point2> ends_;
  geometry::Bounds bounds_{};
};

/// Precomputed chord directions for one polar bin layout.
class PolarBinning {
 public:
  PolarBinning(int angular_bins, int radial_bins, int arc_segments);

  int angular_bins() const { return angular_bins_; }
  int radial_bins() const { return radial_bins_; }
  int chords_per_bin() const { return chords_per_bin_; }

  /// Angular interval of bin i; bin 0 is centered on +x.
  double phi_lo(int i) const;
  double phi_hi(int i) const { return phi_lo(i + 1); }
  /// Radial edge j in units of r_max (edge 0 is 0, edge radial_bins is 1).
  double radial_edge(int j) const {
    return static_cast<double>(j) / radial_bins_;
  }

  /// Histogram of target coverage around s, evaluated against the chord
  /// polygons of every bin.
  void evaluate(Point2 s, const TargetEdges& target, double r_max,
                std::span<double> out) const;

 private:
  int angular_bins_;
  int radial_bins_;
  int chords_per_bin_;
  int chord_count_;
  double chord_angle_;
  double origin_angle_;
  double chord_offset_;    // cos(chord_angle / 2)
  std::vector<Point2> dirs_;  // chord_count_ + 1 boundary directions
  std::vector<Point2> mids_;  // chord_count_ mid directions
  std::vector<double> radial_norm_;  // bin-area normalizers per radial bin
};

/// Max distance from the source centroid to any source vertex.
double compute_r_max(const PolygonSet& source);

/// Point histogram at s: bin (i, j) is the fraction of the polygonized bin
/// covered by the target.
PointHistogram point_histogram(Point2 s, const PolygonSet& target, double r_max,
                               const DescriptorConfig& cfg = {});

/// Insert-once cache of point histograms keyed by sample position and r_max.
/// One instance serves one target geometry; safe for concurrent use.
class PointHistogramCache {
 public:
  /// Returns the cached histogram or computes, inserts and returns it.
  template <typename Compute>
  std::vector<double> get_or_compute(Point2 s, double r_max, Compute&& compute);

  std::size_t size() const;
  std::size_t hits() const { return hits_.load(); }

 private:
  struct Key {
    std::uint64_t x, y, r;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  mutable std::shared_mutex mutex_;
  std::unordered_map<Key, std::vector<double>, KeyHash> entries_;
  std::atomic<std::size_t> hits_{0};
};

/// Sampled RAID descriptor of the source/target pair. Throws
/// DegenerateRegion for a zero-area source and EmptyRelationship when the
/// target never enters the descriptor's reach.
Descriptor raid(const PolygonSet& source, const PolygonSet& target,
                const ImageFrame& frame, const DescriptorConfig& cfg = {},
                PointHistogramCache* cache = nullptr);

/// Unnormalized outer-bin values of the sampled descriptor, same layout as
/// raid(). Exposed for oracle comparisons.
Descriptor raid_unnormalized(const PolygonSet& source, const PolygonSet& target,
                             const ImageFrame& frame,
                             const DescriptorConfig& cfg = {},
                             PointHistogramCache* cache = nullptr);

/// Sum of absolute bin differences. Throws ConfigMismatch on shape or kind
/// mismatch.
double l1_distance(const Descriptor& a, const Descriptor& b);

// ---------------------------------------------------------------------------

template <typename Compute>
std::vector<double> PointHistogramCache::get_or_compute(Point2 s, double r_max,
                                                        Compute&& compute) {
  const Key key{std::bit_cast<std::uint64_t>(s.x), std::bit_cast<std::uint64_t>(s.y),
                std::bit_cast<std::uint64_t>(r_max)};
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      ++hits_;
      return it->second;
    }
  }
  std::vector<double> value = compute();
  std::unique_lock lock(mutex_);
  auto it = entries_.try_emplace(key, std::move(value)).first;
  return it->second;
}

}  // namespace raid::descriptor
