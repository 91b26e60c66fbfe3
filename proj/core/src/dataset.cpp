#include "raid/dataset.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "raid/error.hpp"

namespace raid::dataset {

using nlohmann::json;
using geometry::Point2;
using geometry::Ring;

const LabeledRegion* ImageRecord::find_region(std::string_view region_id) const {
  for (const auto& r : regions) {
    if (r.region_id == region_id) return &r;
  }
  return nullptr;
}

const ImageRecord* Dataset::find_image(std::string_view image_id) const {
  for (const auto& im : images) {
    if (im.image_id == image_id) return &im;
  }
  return nullptr;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return fmt::format("{:016x}", h);
}

namespace {

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// COCO ids are usually integers; strings are accepted too.
std::string id_string(const json& v, const std::string& where) {
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_string()) return v.get<std::string>();
  throw Error(ErrorCode::Parse, where + ": id must be an integer or string");
}

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::Parse, where + ": expected an object");
  auto it = obj.find(name);
  if (it == obj.end()) {
    throw Error(ErrorCode::Parse, fmt::format("{}: missing field '{}'", where, name));
  }
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw Error(ErrorCode::Parse, where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorCode::Parse, where + ": non-finite number");
  return d;
}

}  // namespace

Dataset parse_annotations(std::string_view text, std::string_view source_name) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_and_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorCode::Parse,
                fmt::format("{}:{}:{}: malformed JSON: {}", source_name, line, col, e.what()));
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::Parse, fmt::format("{}: top level must be an object", source_name));
  }

  Dataset out;
  out.digest = fnv1a_hex(text);

  std::unordered_map<std::string, std::string> category_names;
  if (auto it = doc.find("categories"); it != doc.end()) {
    if (!it->is_array()) throw Error(ErrorCode::Parse, "categories: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto where = fmt::format("categories[{}]", i);
      const auto& c = (*it)[i];
      const std::string id = id_string(field(c, "id", where), where);
      const auto& name = field(c, "name", where);
      if (!name.is_string()) throw Error(ErrorCode::Parse, where + ": name must be a string");
      category_names[id] = name.get<std::string>();
      out.categories.push_back(name.get<std::string>());
    }
  }

  std::unordered_map<std::string, std::size_t> image_slot;
  if (auto it = doc.find("images"); it != doc.end()) {
    if (!it->is_array()) throw Error(ErrorCode::Parse, "images: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto where = fmt::format("images[{}]", i);
      const auto& im = (*it)[i];
      ImageRecord rec;
      rec.image_id = id_string(field(im, "id", where), where);
      const double w = number(field(im, "width", where), where + ".width");
      const double h = number(field(im, "height", where), where + ".height");
      if (!(w > 0 && h > 0)) throw Error(ErrorCode::Parse, where + ": width and height must be positive");
      rec.width = static_cast<int>(w);
      rec.height = static_cast<int>(h);
      if (auto fn = im.find("file_name"); fn != im.end() && fn->is_string()) {
        rec.file_name = fn->get<std::string>();
      }
      if (!image_slot.emplace(rec.image_id, out.images.size()).second) {
        throw Error(ErrorCode::Parse, where + ": duplicate image id " + rec.image_id);
      }
      out.images.push_back(std::move(rec));
    }
  }

  auto& warn = out.warnings;
  auto note = [&](std::string msg) {
    if (warn.messages.size() < 100) warn.messages.push_back(std::move(msg));
  };

  if (auto it = doc.find("annotations"); it != doc.end()) {
    if (!it->is_array()) throw Error(ErrorCode::Parse, "annotations: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto where = fmt::format("annotations[{}]", i);
      const auto& an = (*it)[i];
      const std::string id = id_string(field(an, "id", where), where);
      const std::string image_id = id_string(field(an, "image_id", where), where);
      const std::string category = id_string(field(an, "category_id", where), where);
      const auto& seg = field(an, "segmentation", where);

      if (auto crowd = an.find("iscrowd"); crowd != an.end() && crowd->is_number() &&
                                            crowd->get<double>() != 0.0) {
        ++warn.crowd_skipped;
        continue;
      }
      if (seg.is_object()) {
        ++warn.rle_skipped;
        continue;
      }
      if (!seg.is_array()) throw Error(ErrorCode::Parse, where + ": segmentation must be a list");

      auto cat = category_names.find(category);
      if (cat == category_names.end()) {
        ++warn.unknown_category;
        note(fmt::format("{}: unknown category id {}; region dropped", where, category));
        continue;
      }
      auto slot = image_slot.find(image_id);
      if (slot == image_slot.end()) {
        ++warn.unknown_image;
        note(fmt::format("{}: unknown image id {}; region dropped", where, image_id));
        continue;
      }
      ImageRecord& image = out.images[slot->second];
      const double h = image.height;

      std::vector<PolygonSet> parts;
      bool bad_part = false;
      for (std::size_t p = 0; p < seg.size(); ++p) {
        const auto& coords = seg[p];
        const auto pwhere = fmt::format("{}.segmentation[{}]", where, p);
        if (!coords.is_array()) throw Error(ErrorCode::Parse, pwhere + ": expected a coordinate list");
        if (coords.size() % 2 != 0) {
          throw Error(ErrorCode::Parse, pwhere + ": odd number of coordinates");
        }
        Ring ring;
        for (std::size_t k = 0; k + 1 < coords.size(); k += 2) {
          ring.push_back({number(coords[k], pwhere), h - number(coords[k + 1], pwhere)});
        }
        try {
          PolygonSet part = geometry::repair(ring);
          if (!part.empty()) parts.push_back(std::move(part));
        } catch (const Error&) {
          bad_part = true;
        }
      }
      if (bad_part) note(fmt::format("{}: degenerate polygon part ignored", where));
      if (parts.empty()) {
        ++warn.invalid_geometry;
        note(fmt::format("{}: no usable polygon; region dropped", where));
        continue;
      }
      PolygonSet region = geometry::clip_to_bounds(
          geometry::unite(parts), {0.0, 0.0, static_cast<double>(image.width), h});
      if (region.empty() || !(geometry::area(region) > 0.0)) {
        ++warn.outside_image;
        note(fmt::format("{}: region lies outside its image; dropped", where));
        continue;
      }
      image.regions.push_back({id, cat->second, std::move(region)});
    }
  }
  return out;
}

Dataset load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open annotation file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "cannot read annotation file " + path.string());
  return parse_annotations(buf.str(), path.string());
}

namespace {

json id_json(const std::string& id) {
  if (!id.empty() && id.size() < 18 &&
      std::all_of(id.begin(), id.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
      (id == "0" || id[0] != '0')) {
    return std::stoll(id);
  }
  return id;
}

// One COCO part per polygon. Holes are joined to the outer ring by a
// doubled bridge edge, which even-odd repair cancels on reload.
json polygon_parts(const PolygonSet& g, double height) {
  json parts = json::array();
  for (const auto& poly : g.polygons()) {
    std::vector<Point2> ring = poly.outer;
    for (const auto& hole : poly.holes) {
      ring.push_back(poly.outer.front());
      ring.insert(ring.end(), hole.begin(), hole.end());
      ring.push_back(hole.front());
    }
    json coords = json::array();
    for (const auto& p : ring) {
      coords.push_back(p.x);
      coords.push_back(height - p.y);
    }
    parts.push_back(std::move(coords));
  }
  return parts;
}

}  // namespace

std::string format_annotations(const Dataset& data) {
  json doc;
  doc["images"] = json::array();
  doc["annotations"] = json::array();
  doc["categories"] = json::array();
  std::map<std::string, std::size_t> cat_id;
  auto category = [&](const std::string& name) {
    auto [it, inserted] = cat_id.emplace(name, cat_id.size() + 1);
    if (inserted) doc["categories"].push_back({{"id", it->second}, {"name", name}});
    return it->second;
  };
  for (const auto& name : data.categories) category(name);
  for (const auto& im : data.images) {
    json j = {{"id", id_json(im.image_id)}, {"width", im.width}, {"height", im.height}};
    if (!im.file_name.empty()) j["file_name"] = im.file_name;
    doc["images"].push_back(std::move(j));
    for (const auto& r : im.regions) {
      doc["annotations"].push_back({{"id", id_json(r.region_id)},
                                    {"image_id", id_json(im.image_id)},
                                    {"category_id", category(r.label)},
                                    {"iscrowd", 0},
                                    {"area", geometry::area(r.geometry)},
                                    {"segmentation", polygon_parts(r.geometry, im.height)}});
    }
  }
  return doc.dump(1);
}

void write_annotations(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write annotation file " + path.string());
  out << format_annotations(data) << '\n';
  if (!out) throw Error(ErrorCode::Io, "cannot write annotation file " + path.string());
}

std::vector<RelationshipCandidate> enumerate_relationships(
    const ImageRecord& image, const std::optional<std::string>& source_label_filter) {
  std::vector<RelationshipCandidate> out;
  for (std::size_t s = 0; s < image.regions.size(); ++s) {
    const auto& src = image.regions[s];
    if (source_label_filter && src.label != *source_label_filter) continue;
    if (!(geometry::area(src.geometry) > 0.0)) continue;
    std::map<std::string, std::vector<PolygonSet>> groups;
    for (std::size_t t = 0; t < image.regions.size(); ++t) {
      if (t == s) continue;
      groups[image.regions[t].label].push_back(image.regions[t].geometry);
    }
    for (auto& [label, parts] : groups) {
      out.push_back({image.image_id, src.region_id, src.label, label, geometry::unite(parts)});
    }
  }
  return out;
}

RelationshipCandidate make_candidate(const ImageRecord& image, std::string_view source_region_id,
                                     std::string_view target_label) {
  const LabeledRegion* src = image.find_region(source_region_id);
  if (src == nullptr) {
    throw Error(ErrorCode::NotFound, fmt::format("image {} has no region {}", image.image_id,
                                                 source_region_id));
  }
  std::vector<PolygonSet> parts;
  for (const auto& r : image.regions) {
    if (&r != src && r.label == target_label) parts.push_back(r.geometry);
  }
  if (parts.empty()) {
    throw Error(ErrorCode::NotFound, fmt::format("image {} has no other region labeled {}",
                                                 image.image_id, target_label));
  }
  return {image.image_id, src->region_id, src->label, std::string(target_label),
          geometry::unite(parts)};
}

}  // namespace raid::dataset
