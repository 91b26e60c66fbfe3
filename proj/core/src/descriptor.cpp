#include "raid/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "raid/error.hpp"

namespace raid::descriptor {

using geometry::AnnularSector;
using geometry::kPi;
using geometry::kTwoPi;

void DescriptorConfig::validate() const {
  if (angular_bins_point < 1 || radial_bins_point < 1 || angular_bins_outer < 1 ||
      radial_bins_outer < 1) {
    throw Error(ErrorCode::BadRequest, "descriptor bin counts must be >= 1");
  }
  if (!(sample_count_target > 0.0)) {
    throw Error(ErrorCode::BadRequest, "sample_count_target must be positive");
  }
  if (arc_segments < 4) {
    throw Error(ErrorCode::BadRequest, "arc_segments must be at least 4");
  }
  if (!(weight_floor >= 0.0)) {
    throw Error(ErrorCode::BadRequest, "weight_floor must be non-negative");
  }
}

double ImageFrame::sample_spacing(const DescriptorConfig& cfg) const {
  if (!(width > 0.0 && height > 0.0)) {
    throw Error(ErrorCode::BadRequest, "image frame must have positive size");
  }
  return std::sqrt(area() / cfg.sample_count_target);
}

std::string_view to_string(DescriptorKind kind) {
  return kind == DescriptorKind::Raid ? "raid" : "sc";
}

DescriptorKind parse_kind(std::string_view s) {
  if (s == "raid") return DescriptorKind::Raid;
  if (s == "sc") return DescriptorKind::ShapeContext;
  throw Error(ErrorCode::BadRequest,
              "unknown descriptor kind '" + std::string(s) + "' (expected raid|sc)");
}

double Descriptor::sum() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double Descriptor::at(int i, int j, int k, int l) const {
  const auto idx = ((static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k) * shape[3] + l;
  return values.at(idx);
}

std::size_t PointHistogramCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::size_t PointHistogramCache::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::uint64_t v : {k.x, k.y, k.r}) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

double compute_r_max(const PolygonSet& source) {
  const Point2 c = geometry::centroid(source);
  const double r = geometry::max_vertex_distance(source, c);
  if (!(r > 0.0)) {
    throw Error(ErrorCode::DegenerateRegion, "source region has zero extent");
  }
  return r;
}

namespace {

struct OuterBin {
  Point2 mean;
  double inv_two_sigma2;
};

std::vector<OuterBin> outer_bins(Point2 c, double r_max, const DescriptorConfig& cfg) {
  std::vector<OuterBin> bins;
  bins.reserve(cfg.outer_bins());
  const int K = cfg.angular_bins_outer;
  const int L = cfg.radial_bins_outer;
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      AnnularSector s;
      s.center = c;
      s.phi_lo = -kPi / K + kTwoPi * k / K;
      s.phi_hi = -kPi / K + kTwoPi * (k + 1) / K;
      s.r_lo = r_max * l / L;
      s.r_hi = r_max * (l + 1) / L;
      // Unit-peak Gaussian with the bin's area as volume: 2 pi sigma^2 = a_kl.
      const double sigma2 = s.exact_area() / kTwoPi;
      bins.push_back({s.exact_centroid(), 1.0 / (2.0 * sigma2)});
    }
  }
  return bins;
}

// The target restricted to the region any point histogram of this source
// can see; areas inside every bin are unchanged.
TargetEdges visible_target(const PolygonSet& source, const PolygonSet& target,
                           double r_max) {
  const auto sb = source.bounds();
  const double pad = r_max * (1.0 + 1e-6);
  return TargetEdges(target, {sb.min_x - pad, sb.min_y - pad, sb.max_x + pad, sb.max_y + pad});
}

}  // namespace

Descriptor raid_unnormalized(const PolygonSet& source, const PolygonSet& target,
                             const ImageFrame& frame, const DescriptorConfig& cfg,
                             PointHistogramCache* cache) {
  cfg.validate();
  const double spacing = frame.sample_spacing(cfg);
  const Point2 c = geometry::centroid(source);
  const double r_max = geometry::max_vertex_distance(source, c);
  if (!(r_max > 0.0)) {
    throw Error(ErrorCode::DegenerateRegion, "source region has zero extent");
  }
  if (target.empty()) {
    throw Error(ErrorCode::EmptyRelationship, "target region is empty");
  }

  const TargetEdges edges = visible_target(source, target, r_max);
  const PolarBinning binning(cfg.angular_bins_point, cfg.radial_bins_point,
                             cfg.arc_segments);
  // The grid moves with the source and has a sample at its centroid, so the
  // descriptor does not depend on where the pair sits in the image.
  const std::vector<Point2> samples =
      geometry::sample_grid(source, spacing, c - 0.5 * Point2{spacing, spacing});
  const std::size_t nb = cfg.point_bins();

  std::vector<double> hist(samples.size() * nb);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    std::span<double> dst(hist.data() + s * nb, nb);
    if (cache != nullptr) {
      const auto v = cache->get_or_compute(samples[s], r_max, [&] {
        std::vector<double> h(nb);
        binning.evaluate(samples[s], edges, r_max, h);
        return h;
      });
      std::copy(v.begin(), v.end(), dst.begin());
    } else {
      binning.evaluate(samples[s], edges, r_max, dst);
    }
  }

  const auto bins = outer_bins(c, r_max, cfg);
  const std::size_t no = bins.size();
  // accum[o * nb + b]: Gaussian-weighted sum of point-histogram bin b for outer bin o.
  std::vector<double> accum(no * nb, 0.0);
  std::vector<double> weight_sum(no, 0.0);
  std::vector<double> nearest_d2(no, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> nearest(no, 0);

  for (std::size_t s = 0; s < samples.size(); ++s) {
    const double* h = hist.data() + s * nb;
    for (std::size_t o = 0; o < no; ++o) {
      const Point2 d = samples[s] - bins[o].mean;
      const double d2 = geometry::dot(d, d);
      if (d2 < nearest_d2[o]) {
        nearest_d2[o] = d2;
        nearest[o] = s;
      }
      const double w = std::exp(-d2 * bins[o].inv_two_sigma2);
      if (w == 0.0) continue;
      weight_sum[o] += w;
      double* acc = accum.data() + o * nb;
      for (std::size_t b = 0; b < nb; ++b) acc[b] += w * h[b];
    }
  }

  Descriptor out;
  out.kind = DescriptorKind::Raid;
  out.shape = {cfg.angular_bins_point, cfg.radial_bins_point, cfg.angular_bins_outer,
               cfg.radial_bins_outer};
  out.r_max = r_max;
  out.values.assign(cfg.total_bins(), 0.0);
  for (std::size_t o = 0; o < no; ++o) {
    const bool fallback = weight_sum[o] < cfg.weight_floor;
    const double* src = fallback ? hist.data() + nearest[o] * nb : accum.data() + o * nb;
    const double scale = fallback ? 1.0 : 1.0 / weight_sum[o];
    for (std::size_t b = 0; b < nb; ++b) {
      // Flattened [i][j][k][l]: point bin b = i * R + j is the major index.
      out.values[b * no + o] = src[b] * scale;
    }
  }
  return out;
}

Descriptor raid(const PolygonSet& source, const PolygonSet& target,
                const ImageFrame& frame, const DescriptorConfig& cfg,
                PointHistogramCache* cache) {
  Descriptor d = raid_unnormalized(source, target, frame, cfg, cache);
  const double total = d.sum();
  if (!(total > 0.0)) {
    throw Error(ErrorCode::EmptyRelationship,
                "target does not reach any descriptor bin");
  }
  for (double& v : d.values) v /= total;
  return d;
}

double l1_distance(const Descriptor& a, const Descriptor& b) {
  if (a.kind != b.kind || a.shape != b.shape || a.values.size() != b.values.size()) {
    throw Error(ErrorCode::ConfigMismatch, "descriptor kind or shape mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) s += std::abs(a.values[i] - b.values[i]);
  return s;
}

}  // namespace raid::descriptor
