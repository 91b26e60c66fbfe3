#pragma once

#include "raid/descriptor.hpp"

namespace raid::baseline {

/// Shape-Context-style baseline: the point histogram at the source centroid,
/// using the RAID point-bin layout and r_max, normalized to sum 1. The result
/// has kind ShapeContext and shape {A, R, 1, 1}.
///
/// Throws DegenerateRegion for a zero-area source and EmptyRelationship when
/// the histogram is all zero.
descriptor::Descriptor shape_context(const geometry::PolygonSet& source,
                                     const geometry::PolygonSet& target,
                                     const descriptor::DescriptorConfig& cfg = {});

}  // namespace raid::baseline
