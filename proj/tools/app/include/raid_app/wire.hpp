#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "raid/dataset.hpp"
#include "raid/descriptor.hpp"
#include "raid/error.hpp"
#include "raid/index.hpp"
#include "raid/verb_store.hpp"

// JSON wire format shared by the CLI and the HTTP service. Polygons on the
// wire are in image coordinates (y down); the library works y-up.
namespace raid::app {

using nlohmann::json;

/// [{"outer": [[x, y], ...], "holes": [[[x, y], ...], ...]}, ...], y down.
json polygons_to_json(const geometry::PolygonSet& p, double height);

/// Rings [[[x, y], ...], ...] in y-down coordinates, flipped and repaired
/// with even-odd fill. Throws BadRequest on malformed input and
/// InvalidPolygon when nothing valid remains.
geometry::PolygonSet polygons_from_json(const json& rings, double height, const char* field);

json descriptor_to_json(const descriptor::Descriptor& d);
/// {"values": [...], "kind"?: "raid"|"sc", "shape"?: [a, r, k, l],
/// "r_max"?: x}. Missing kind and shape default to those of the index.
descriptor::Descriptor descriptor_from_json(const json& j, const index::DescriptorIndex* index);

struct SketchRequest {
  geometry::PolygonSet source;
  geometry::PolygonSet target;
  descriptor::ImageFrame frame;
  descriptor::DescriptorKind kind = descriptor::DescriptorKind::Raid;
};

/// {"source": rings, "target": rings, "width": w, "height": h, "kind"?}.
SketchRequest sketch_from_json(const json& j);
descriptor::Descriptor compute_sketch(const SketchRequest& s,
                                      const descriptor::DescriptorConfig& cfg = {});

/// Ranked results. Outlines of the source region and the merged target are
/// included when the dataset is given.
json results_to_json(const index::DescriptorIndex& index,
                     const std::vector<index::QueryResult>& results,
                     const dataset::Dataset* data);

json image_summary_json(const dataset::ImageRecord& image);
json image_detail_json(const dataset::ImageRecord& image);

json verb_summary_json(const verbs::VerbEntry& e);
json verb_detail_json(const verbs::VerbEntry& e);

/// {"error": {"code", "message", "detail"?}}.
json error_json(std::string_view code, std::string_view message, const json& detail = nullptr);
/// Wire code of a library error; parse errors map to bad_request.
std::string_view wire_code(ErrorCode code);
/// HTTP status of a library error.
int http_status(ErrorCode code);

/// Field accessors that raise BadRequest naming the offending field.
const json& require(const json& body, const char* field);
std::string require_string(const json& body, const char* field);
double require_number(const json& body, const char* field);
std::optional<std::string> optional_string(const json& body, const char* field);

}  // namespace raid::app
