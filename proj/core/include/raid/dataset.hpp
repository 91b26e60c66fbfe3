#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "raid/descriptor.hpp"
#include "raid/geometry.hpp"

namespace raid::dataset {

using geometry::PolygonSet;

struct LabeledRegion {
  std::string region_id;
  std::string label;
  /// Repaired, clipped to the image, y-up.
  PolygonSet geometry;
};

struct ImageRecord {
  std::string image_id;
  std::string file_name;
  int width = 0;
  int height = 0;
  std::vector<LabeledRegion> regions;

  descriptor::ImageFrame frame() const {
    return {static_cast<double>(width), static_cast<double>(height)};
  }
  const LabeledRegion* find_region(std::string_view region_id) const;
};

/// Counts of annotations that were not turned into regions.
struct LoadWarnings {
  std::size_t rle_skipped = 0;
  std::size_t crowd_skipped = 0;
  std::size_t unknown_category = 0;
  std::size_t unknown_image = 0;
  std::size_t invalid_geometry = 0;
  std::size_t outside_image = 0;
  std::vector<std::string> messages;

  std::size_t total() const {
    return rle_skipped + crowd_skipped + unknown_category + unknown_image +
           invalid_geometry + outside_image;
  }
};

struct Dataset {
  std::vector<ImageRecord> images;
  std::vector<std::string> categories;
  LoadWarnings warnings;
  /// FNV-1a 64 of the annotation bytes, as 16 hex digits.
  std::string digest;

  const ImageRecord* find_image(std::string_view image_id) const;
};

/// Reads a COCO-style annotation file: images, categories and annotations
/// with polygon segmentations in y-down pixel coordinates. Polygons are
/// flipped to y-up (y' = height - y), each part is repaired with even-odd
/// fill, parts are united and the result is clipped to the image rectangle.
/// RLE and crowd annotations are skipped and counted; annotations with an
/// unknown category or image are dropped and counted.
///
/// Throws Io when the file cannot be read and Parse (with line and record
/// context) on malformed content.
Dataset load_annotations(const std::filesystem::path& path);
Dataset parse_annotations(std::string_view text, std::string_view source_name = "<memory>");

/// Writes images, categories and regions back as COCO (y-down). Region and
/// image ids that are decimal integers are written as numbers.
void write_annotations(const Dataset& data, const std::filesystem::path& path);
std::string format_annotations(const Dataset& data);

std::string fnv1a_hex(std::string_view bytes);

struct RelationshipCandidate {
  std::string image_id;
  std::string source_region_id;
  std::string source_label;
  std::string target_label;
  /// Union of every other region carrying target_label.
  PolygonSet merged_target;
};

/// One candidate per (source region, distinct label among the other
/// regions), sources in region order and target labels sorted. The source
/// region is never part of its own target, but other regions with the same
/// label are. Zero-area sources yield no candidates.
std::vector<RelationshipCandidate> enumerate_relationships(
    const ImageRecord& image, const std::optional<std::string>& source_label_filter = {});

/// Convenience for one named candidate; throws NotFound when the image has no
/// such source region or no other region with target_label.
RelationshipCandidate make_candidate(const ImageRecord& image, std::string_view source_region_id,
                                     std::string_view target_label);

}  // namespace raid::dataset
