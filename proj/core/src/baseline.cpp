#include "raid/baseline.hpp"

#include "raid/error.hpp"

namespace raid::baseline {

descriptor::Descriptor shape_context(const geometry::PolygonSet& source,
                                     const geometry::PolygonSet& target,
                                     const descriptor::DescriptorConfig& cfg) {
  cfg.validate();
  const auto c = geometry::centroid(source);
  const double r_max = descriptor::compute_r_max(source);
  if (target.empty()) {
    throw Error(ErrorCode::EmptyRelationship, "target region is empty");
  }
  const auto h = descriptor::point_histogram(c, target, r_max, cfg);

  descriptor::Descriptor d;
  d.kind = descriptor::DescriptorKind::ShapeContext;
  d.shape = {cfg.angular_bins_point, cfg.radial_bins_point, 1, 1};
  d.r_max = r_max;
  d.values = h.bins;
  const double total = d.sum();
  if (!(total > 0.0)) {
    throw Error(ErrorCode::EmptyRelationship,
                "target does not reach any bin around the source centroid");
  }
  for (double& v : d.values) v /= total;
  return d;
}

}  // namespace raid::baseline
