#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "raid/classifier.hpp"
#include "raid/dataset.hpp"
#include "raid/geometry.hpp"

namespace raid::synthetic {

/// Generator designs: the nine relationship classes followed by "none".
const std::vector<std::string>& design_names();
/// The nine relationship classes ("none" excluded).
const std::vector<std::string>& relationship_classes();

inline constexpr double kFrameSize = 256.0;

struct SyntheticPair {
  geometry::PolygonSet source;
  /// One entry per target part, e.g. the two pillars of a bridge.
  std::vector<geometry::PolygonSet> target_parts;
  /// Empty for "none".
  std::set<std::string> classes;

  geometry::PolygonSet target() const;
};

/// count jittered pairs of one design in a kFrameSize square frame,
/// y-up. Each pair admits both a RAID and a baseline descriptor.
/// Deterministic for a fixed seed. Throws BadRequest for an unknown design.
std::vector<SyntheticPair> generate_synthetic(std::string_view design, int count,
                                              std::uint64_t seed);

struct SyntheticDataset {
  dataset::Dataset data;
  std::vector<classifier::RelationLabel> labels;
};

/// One image per pair with region "source" (id 1) and target parts
/// (ids 2, 3, ...). Image ids run design-major from 1. Design d uses seed
/// seed + d so that designs are independent of each other.
SyntheticDataset build_synthetic(const std::vector<std::string>& designs, int per_design,
                                 std::uint64_t seed);

/// Writes annotations.json and labels.json into dir.
void write_synthetic(const SyntheticDataset& s, const std::filesystem::path& dir);

}  // namespace raid::synthetic
