#include "raid_app/wire.hpp"

#include <fmt/format.h>

#include <cmath>

#include "raid/baseline.hpp"

namespace raid::app {

namespace {

json ring_to_json(const geometry::Ring& r, double height) {
  json out = json::array();
  for (const auto& p : r) out.push_back({p.x, height - p.y});
  return out;
}

}  // namespace

json polygons_to_json(const geometry::PolygonSet& p, double height) {
  json out = json::array();
  for (const auto& poly : p.polygons()) {
    json holes = json::array();
    for (const auto& h : poly.holes) holes.push_back(ring_to_json(h, height));
    out.push_back({{"outer", ring_to_json(poly.outer, height)}, {"holes", holes}});
  }
  return out;
}

geometry::PolygonSet polygons_from_json(const json& rings, double height, const char* field) {
  if (!rings.is_array()) throw Error(ErrorCode::BadRequest, fmt::format("'{}' must be a list of rings", field));
  std::vector<geometry::Ring> parsed;
  bool any_area = false;
  for (std::size_t i = 0; i < rings.size(); ++i) {
    const auto& r = rings[i];
    if (!r.is_array()) {
      throw Error(ErrorCode::BadRequest, fmt::format("{}[{}] must be a list of [x, y] points", field, i));
    }
    geometry::Ring ring;
    for (const auto& pt : r) {
      if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
        throw Error(ErrorCode::BadRequest, fmt::format("{}[{}] has a point that is not [x, y]", field, i));
      }
      ring.push_back({pt[0].get<double>(), height - pt[1].get<double>()});
    }
    if (ring.size() < 3) {
      throw Error(ErrorCode::InvalidPolygon, fmt::format("{}[{}] has fewer than 3 vertices", field, i));
    }
    any_area = any_area || geometry::signed_ring_area(ring) != 0.0;
    parsed.push_back(std::move(ring));
  }
  if (!any_area) return {};
  try {
    return geometry::repair(parsed);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidPolygon) throw;
    throw Error(ErrorCode::InvalidPolygon, fmt::format("{}: {}", field, e.what()));
  }
}

json descriptor_to_json(const descriptor::Descriptor& d) {
  return {{"kind", std::string(descriptor::to_string(d.kind))},
          {"shape", d.shape},
          {"r_max", d.r_max},
          {"values", d.values}};
}

descriptor::Descriptor descriptor_from_json(const json& j, const index::DescriptorIndex* index) {
  if (!j.is_object()) throw Error(ErrorCode::BadRequest, "'descriptor' must be an object");
  descriptor::Descriptor d;
  if (auto k = j.find("kind"); k != j.end()) {
    if (!k->is_string()) throw Error(ErrorCode::BadRequest, "'descriptor.kind' must be a string");
    d.kind = descriptor::parse_kind(k->get<std::string>());
  } else if (index != nullptr) {
    d.kind = index->kind();
  }
  if (auto s = j.find("shape"); s != j.end()) {
    if (!s->is_array() || s->size() != 4) {
      throw Error(ErrorCode::BadRequest, "'descriptor.shape' must be four integers");
    }
    for (int i = 0; i < 4; ++i) {
      if (!(*s)[i].is_number_integer()) {
        throw Error(ErrorCode::BadRequest, "'descriptor.shape' must be four integers");
      }
      d.shape[i] = (*s)[i].get<int>();
    }
  } else {
    d.shape = index::shape_for(d.kind, index != nullptr ? index->config() : descriptor::DescriptorConfig{});
  }
  if (auto r = j.find("r_max"); r != j.end() && r->is_number()) d.r_max = r->get<double>();
  const auto& values = require(j, "values");
  if (!values.is_array()) throw Error(ErrorCode::BadRequest, "'descriptor.values' must be a list");
  for (const auto& v : values) {
    if (!v.is_number()) throw Error(ErrorCode::BadRequest, "'descriptor.values' must hold numbers");
    d.values.push_back(v.get<double>());
  }
  const auto& s = d.shape;
  if (s[0] < 1 || s[1] < 1 || s[2] < 1 || s[3] < 1 ||
      d.values.size() != static_cast<std::size_t>(s[0]) * s[1] * s[2] * s[3]) {
    throw Error(ErrorCode::ConfigMismatch,
                fmt::format("descriptor has {} values, its shape needs {}", d.values.size(),
                            static_cast<long long>(s[0]) * s[1] * s[2] * s[3]));
  }
  return d;
}

SketchRequest sketch_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::BadRequest, "request body must be an object");
  SketchRequest s;
  s.frame.width = require_number(j, "width");
  s.frame.height = require_number(j, "height");
  if (!(s.frame.width > 0 && s.frame.height > 0)) {
    throw Error(ErrorCode::BadRequest, "'width' and 'height' must be positive");
  }
  if (auto k = optional_string(j, "kind")) s.kind = descriptor::parse_kind(*k);
  s.source = polygons_from_json(require(j, "source"), s.frame.height, "source");
  s.target = polygons_from_json(require(j, "target"), s.frame.height, "target");
  return s;
}

descriptor::Descriptor compute_sketch(const SketchRequest& s, const descriptor::DescriptorConfig& cfg) {
  if (s.source.empty() || !(geometry::area(s.source) > 0.0)) {
    throw Error(ErrorCode::DegenerateRegion, "source region has zero area");
  }
  return index::compute_descriptor(s.kind, s.source, s.target, s.frame, cfg);
}

json results_to_json(const index::DescriptorIndex& index,
                     const std::vector<index::QueryResult>& results, const dataset::Dataset* data) {
  json out = json::array();
  for (std::size_t r = 0; r < results.size(); ++r) {
    const auto i = results[r].record;
    json item = {{"rank", r + 1},
                 {"image_id", index.image_id(i)},
                 {"source_region_id", index.source_region_id(i)},
                 {"source_label", index.source_label(i)},
                 {"target_label", index.target_label(i)},
                 {"distance", results[r].distance},
                 {"area_fraction", static_cast<double>(index.area_fraction(i))},
                 {"r_max", static_cast<double>(index.r_max(i))}};
    if (data != nullptr) {
      if (const auto* image = data->find_image(index.image_id(i))) {
        item["width"] = image->width;
        item["height"] = image->height;
        item["file_name"] = image->file_name;
        const auto c = dataset::make_candidate(*image, index.source_region_id(i), index.target_label(i));
        item["outlines"] = {
            {"source", polygons_to_json(image->find_region(c.source_region_id)->geometry, image->height)},
            {"target", polygons_to_json(c.merged_target, image->height)}};
      }
    }
    out.push_back(std::move(item));
  }
  return out;
}

json image_summary_json(const dataset::ImageRecord& image) {
  json labels = json::array();
  for (const auto& r : image.regions) labels.push_back(r.label);
  return {{"image_id", image.image_id},
          {"file_name", image.file_name},
          {"width", image.width},
          {"height", image.height},
          {"region_count", image.regions.size()},
          {"labels", labels}};
}

json image_detail_json(const dataset::ImageRecord& image) {
  json regions = json::array();
  for (const auto& r : image.regions) {
    regions.push_back({{"region_id", r.region_id},
                       {"label", r.label},
                       {"area", geometry::area(r.geometry)},
                       {"polygons", polygons_to_json(r.geometry, image.height)}});
  }
  return {{"image_id", image.image_id},
          {"file_name", image.file_name},
          {"width", image.width},
          {"height", image.height},
          {"regions", regions}};
}

json verb_summary_json(const verbs::VerbEntry& e) {
  return {{"verb", e.verb},
          {"kind", std::string(descriptor::to_string(e.descriptor.kind))},
          {"shape", e.descriptor.shape},
          {"created_from", e.created_from}};
}

json verb_detail_json(const verbs::VerbEntry& e) {
  json j = verb_summary_json(e);
  j["descriptor"] = descriptor_to_json(e.descriptor);
  return j;
}

json error_json(std::string_view code, std::string_view message, const json& detail) {
  json e = {{"code", code}, {"message", message}};
  if (!detail.is_null()) e["detail"] = detail;
  return {{"error", e}};
}

std::string_view wire_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse: return "bad_request";
    case ErrorCode::Io: return "internal_error";
    default: return to_string(code);
  }
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::Conflict: return 409;
    case ErrorCode::BadRequest:
    case ErrorCode::ConfigMismatch:
    case ErrorCode::Parse: return 400;
    case ErrorCode::InvalidPolygon:
    case ErrorCode::DegenerateRegion:
    case ErrorCode::EmptyRelationship: return 422;
    case ErrorCode::Io: return 500;
  }
  return 500;
}

const json& require(const json& body, const char* field) {
  if (!body.is_object()) throw Error(ErrorCode::BadRequest, "request body must be an object");
  auto it = body.find(field);
  if (it == body.end() || it->is_null()) {
    throw Error(ErrorCode::BadRequest, fmt::format("missing field '{}'", field));
  }
  return *it;
}

std::string require_string(const json& body, const char* field) {
  const auto& v = require(body, field);
  if (!v.is_string()) throw Error(ErrorCode::BadRequest, fmt::format("'{}' must be a string", field));
  return v.get<std::string>();
}

double require_number(const json& body, const char* field) {
  const auto& v = require(body, field);
  if (!v.is_number()) throw Error(ErrorCode::BadRequest, fmt::format("'{}' must be a number", field));
  return v.get<double>();
}

std::optional<std::string> optional_string(const json& body, const char* field) {
  auto it = body.find(field);
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(ErrorCode::BadRequest, fmt::format("'{}' must be a string", field));
  return it->get<std::string>();
}

}  // namespace raid::app
