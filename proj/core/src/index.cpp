#include "raid/index.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "raid/baseline.hpp"
#include "raid/error.hpp"

namespace raid::index {

using nlohmann::json;

Descriptor compute_descriptor(DescriptorKind kind, const geometry::PolygonSet& source,
                              const geometry::PolygonSet& target,
                              const descriptor::ImageFrame& frame, const DescriptorConfig& cfg,
                              descriptor::PointHistogramCache* cache) {
  if (kind == DescriptorKind::ShapeContext) return baseline::shape_context(source, target, cfg);
  return descriptor::raid(source, target, frame, cfg, cache);
}

DescriptorShape shape_for(DescriptorKind kind, const DescriptorConfig& cfg) {
  if (kind == DescriptorKind::ShapeContext) {
    return {cfg.angular_bins_point, cfg.radial_bins_point, 1, 1};
  }
  return {cfg.angular_bins_point, cfg.radial_bins_point, cfg.angular_bins_outer,
          cfg.radial_bins_outer};
}

namespace {

std::size_t product(const DescriptorShape& s) {
  return static_cast<std::size_t>(s[0]) * s[1] * s[2] * s[3];
}

}  // namespace

void QuerySpec::validate() const {
  if (top_n < 1) throw Error(ErrorCode::BadRequest, "top_n must be at least 1");
  if (std::isnan(min_area_fraction) || min_area_fraction < 0.0) {
    throw Error(ErrorCode::BadRequest, "min_area_fraction must be a non-negative number");
  }
}

DescriptorIndex::DescriptorIndex(DescriptorConfig config, DescriptorKind kind,
                                 std::string dataset_digest)
    : config_(config),
      kind_(kind),
      shape_(shape_for(kind, config)),
      dims_(product(shape_)),
      digest_(std::move(dataset_digest)) {
  config_.validate();
}

RecordKey DescriptorIndex::key(std::size_t i) const {
  return {image_id(i), source_region_id(i), source_label(i), target_label(i)};
}

const std::string& DescriptorIndex::image_id(std::size_t i) const {
  return strings_[records_.at(i).image];
}
const std::string& DescriptorIndex::source_region_id(std::size_t i) const {
  return strings_[records_.at(i).region];
}
const std::string& DescriptorIndex::source_label(std::size_t i) const {
  return strings_[records_.at(i).source_label];
}
const std::string& DescriptorIndex::target_label(std::size_t i) const {
  return strings_[records_.at(i).target_label];
}

std::span<const float> DescriptorIndex::values(std::size_t i) const {
  if (i >= records_.size()) throw Error(ErrorCode::NotFound, "index record out of range");
  return {values_.data() + i * dims_, dims_};
}

Descriptor DescriptorIndex::descriptor(std::size_t i) const {
  Descriptor d;
  d.kind = kind_;
  d.shape = shape_;
  d.r_max = records_.at(i).r_max;
  const auto v = values(i);
  d.values.assign(v.begin(), v.end());
  return d;
}

std::uint32_t DescriptorIndex::intern(const std::string& s) {
  auto it = string_ids_.find(s);
  if (it != string_ids_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(strings_.size());
  strings_.push_back(s);
  string_ids_.emplace(s, id);
  return id;
}

void DescriptorIndex::add(const RecordKey& key, double area_fraction, const Descriptor& d) {
  if (d.kind != kind_ || d.shape != shape_ || d.values.size() != dims_) {
    throw Error(ErrorCode::ConfigMismatch, "descriptor does not match the index kind or shape");
  }
  Record r;
  r.image = intern(key.image_id);
  r.region = intern(key.source_region_id);
  r.source_label = intern(key.source_label);
  r.target_label = intern(key.target_label);
  r.area_fraction = static_cast<float>(area_fraction);
  r.r_max = static_cast<float>(d.r_max);
  records_.push_back(r);
  for (double v : d.values) values_.push_back(static_cast<float>(v));
}

std::optional<std::size_t> DescriptorIndex::find(std::string_view image_id,
                                                 std::string_view source_region_id,
                                                 std::string_view target_label) const {
  auto im = string_ids_.find(image_id);
  auto rg = string_ids_.find(source_region_id);
  auto tl = string_ids_.find(target_label);
  if (im == string_ids_.end() || rg == string_ids_.end() || tl == string_ids_.end()) {
    return std::nullopt;
  }
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.image == im->second && r.region == rg->second && r.target_label == tl->second) return i;
  }
  return std::nullopt;
}

bool DescriptorIndex::key_less(std::size_t a, std::size_t b) const {
  const auto& ra = records_[a];
  const auto& rb = records_[b];
  if (ra.image != rb.image) return strings_[ra.image] < strings_[rb.image];
  if (ra.region != rb.region) return strings_[ra.region] < strings_[rb.region];
  if (ra.target_label != rb.target_label) {
    return strings_[ra.target_label] < strings_[rb.target_label];
  }
  return a < b;
}

std::vector<QueryResult> DescriptorIndex::query(const QuerySpec& spec) const {
  spec.validate();
  const Descriptor& q = spec.descriptor;
  if (q.kind != kind_ || q.shape != shape_ || q.values.size() != dims_) {
    throw Error(ErrorCode::ConfigMismatch,
                fmt::format("query descriptor ({}, {} values) does not match the index ({}, {} values)",
                            descriptor::to_string(q.kind), q.values.size(),
                            descriptor::to_string(kind_), dims_));
  }

  // A label absent from the string table matches nothing.
  auto label_id = [&](const std::optional<std::string>& label) -> std::optional<std::int64_t> {
    if (!label) return std::nullopt;
    auto it = string_ids_.find(*label);
    return it == string_ids_.end() ? -1 : static_cast<std::int64_t>(it->second);
  };
  const auto want_source = label_id(spec.source_label);
  const auto want_target = label_id(spec.target_label);

  std::vector<float> qf(q.values.begin(), q.values.end());
  std::vector<QueryResult> hits;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const Record& r = records_[i];
    if (want_source && *want_source != r.source_label) continue;
    if (want_target && *want_target != r.target_label) continue;
    if (!(static_cast<double>(r.area_fraction) >= spec.min_area_fraction)) continue;
    const float* v = values_.data() + i * dims_;
    double d = 0.0;
    for (std::size_t b = 0; b < dims_; ++b) d += std::abs(static_cast<double>(v[b]) - qf[b]);
    hits.push_back({i, d});
  }

  auto less = [&](const QueryResult& a, const QueryResult& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return key_less(a.record, b.record);
  };
  const auto n = std::min(hits.size(), static_cast<std::size_t>(spec.top_n));
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), less);
  hits.resize(n);
  return hits;
}

namespace {

constexpr char kMagic[8] = {'R', 'A', 'I', 'D', 'I', 'D', 'X', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  return v;
}

float get_f32(const char* p) { return std::bit_cast<float>(get_u32(p)); }

json config_json(const DescriptorConfig& c) {
  return {{"angular_bins_point", c.angular_bins_point},
          {"radial_bins_point", c.radial_bins_point},
          {"angular_bins_outer", c.angular_bins_outer},
          {"radial_bins_outer", c.radial_bins_outer},
          {"sample_count_target", c.sample_count_target},
          {"arc_segments", c.arc_segments},
          {"weight_floor", c.weight_floor}};
}

DescriptorConfig config_from_json(const json& j) {
  DescriptorConfig c;
  c.angular_bins_point = j.at("angular_bins_point").get<int>();
  c.radial_bins_point = j.at("radial_bins_point").get<int>();
  c.angular_bins_outer = j.at("angular_bins_outer").get<int>();
  c.radial_bins_outer = j.at("radial_bins_outer").get<int>();
  c.sample_count_target = j.at("sample_count_target").get<double>();
  c.arc_segments = j.at("arc_segments").get<int>();
  c.weight_floor = j.at("weight_floor").get<double>();
  return c;
}

}  // namespace

std::string DescriptorIndex::serialize() const {
  json header = {{"config", config_json(config_)},
                 {"dataset_digest", digest_},
                 {"descriptor_kind", std::string(descriptor::to_string(kind_))},
                 {"shape", shape_},
                 {"dims", dims_},
                 {"record_count", records_.size()},
                 {"strings", strings_}};
  const std::string text = header.dump();
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  out.reserve(out.size() + records_.size() * (24 + 4 * dims_));
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const Record& r = records_[i];
    put_u32(out, r.image);
    put_u32(out, r.region);
    put_u32(out, r.source_label);
    put_u32(out, r.target_label);
    put_f32(out, r.area_fraction);
    put_f32(out, r.r_max);
    for (std::size_t b = 0; b < dims_; ++b) put_f32(out, values_[i * dims_ + b]);
  }
  return out;
}

DescriptorIndex DescriptorIndex::deserialize(std::string_view bytes, std::string_view source_name) {
  auto fail = [&](const std::string& what) {
    return Error(ErrorCode::Parse, fmt::format("{}: {}", source_name, what));
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw fail("not a RAID index file (bad magic)");
  }
  const std::uint32_t header_len = get_u32(bytes.data() + 8);
  if (bytes.size() - 12 < header_len) throw fail("truncated header");

  DescriptorIndex idx;
  std::size_t count = 0;
  try {
    const json h = json::parse(bytes.substr(12, header_len));
    idx.config_ = config_from_json(h.at("config"));
    idx.config_.validate();
    idx.kind_ = descriptor::parse_kind(h.at("descriptor_kind").get<std::string>());
    idx.shape_ = shape_for(idx.kind_, idx.config_);
    idx.dims_ = product(idx.shape_);
    if (h.at("shape").get<DescriptorShape>() != idx.shape_ ||
        h.at("dims").get<std::size_t>() != idx.dims_) {
      throw fail("header shape disagrees with its config");
    }
    idx.digest_ = h.at("dataset_digest").get<std::string>();
    idx.strings_ = h.at("strings").get<std::vector<std::string>>();
    count = h.at("record_count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw fail(fmt::format("bad header: {}", e.what()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) throw;
    throw fail(fmt::format("bad header: {}", e.what()));
  }
  for (std::uint32_t i = 0; i < idx.strings_.size(); ++i) idx.string_ids_.emplace(idx.strings_[i], i);

  const std::size_t rec_size = 24 + 4 * idx.dims_;
  const std::size_t body = bytes.size() - 12 - header_len;
  if (body != count * rec_size) {
    throw fail(fmt::format("expected {} records of {} bytes, found {} bytes", count, rec_size, body));
  }
  idx.records_.resize(count);
  idx.values_.resize(count * idx.dims_);
  const char* p = bytes.data() + 12 + header_len;
  for (std::size_t i = 0; i < count; ++i, p += rec_size) {
    Record& r = idx.records_[i];
    r.image = get_u32(p);
    r.region = get_u32(p + 4);
    r.source_label = get_u32(p + 8);
    r.target_label = get_u32(p + 12);
    for (auto s : {r.image, r.region, r.source_label, r.target_label}) {
      if (s >= idx.strings_.size()) throw fail(fmt::format("record {} has a bad string id", i));
    }
    r.area_fraction = get_f32(p + 16);
    r.r_max = get_f32(p + 20);
    for (std::size_t b = 0; b < idx.dims_; ++b) idx.values_[i * idx.dims_ + b] = get_f32(p + 24 + 4 * b);
  }
  return idx;
}

void DescriptorIndex::save(const std::filesystem::path& path) const {
  const std::string bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write index file " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "cannot write index file " + path.string());
}

DescriptorIndex DescriptorIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open index file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str(), path.string());
}

std::size_t BuildStats::skipped_total() const {
  std::size_t n = 0;
  for (const auto& [code, count] : skipped) n += count;
  return n;
}

namespace {

struct ImageOutput {
  std::vector<std::pair<RecordKey, std::pair<double, Descriptor>>> records;
  std::size_t candidates = 0;
  std::map<std::string, std::size_t> skipped;
};

ImageOutput describe_image(const dataset::ImageRecord& image, const DescriptorConfig& cfg,
                           const BuildOptions& options) {
  ImageOutput out;
  const auto frame = image.frame();
  const double image_area = frame.area();
  // One cache per target label group: histograms depend only on the target.
  std::map<std::string, descriptor::PointHistogramCache> caches;
  for (auto& c : dataset::enumerate_relationships(image, options.source_label)) {
    ++out.candidates;
    const auto* src = image.find_region(c.source_region_id);
    try {
      Descriptor d = compute_descriptor(options.kind, src->geometry, c.merged_target, frame, cfg,
                                        &caches[c.target_label]);
      RecordKey key{c.image_id, c.source_region_id, c.source_label, c.target_label};
      out.records.push_back({std::move(key), {geometry::area(src->geometry) / image_area, std::move(d)}});
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::DegenerateRegion:
        case ErrorCode::EmptyRelationship:
        case ErrorCode::InvalidPolygon:
          ++out.skipped[std::string(to_string(e.code()))];
          break;
        default:
          throw;
      }
    }
  }
  return out;
}

}  // namespace

BuildResult build_index(const dataset::Dataset& data, const DescriptorConfig& cfg,
                        const BuildOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  BuildResult result{DescriptorIndex(cfg, options.kind, data.digest), {}};

  const std::size_t n = data.images.size();
  std::vector<ImageOutput> outputs(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        outputs[i] = describe_image(data.images[i], cfg, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads =
      static_cast<unsigned>(std::clamp<std::size_t>(options.threads == 0 ? 1 : options.threads, 1,
                                                    std::max<std::size_t>(n, 1)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  auto& stats = result.stats;
  stats.images = n;
  for (auto& o : outputs) {
    stats.candidates += o.candidates;
    for (const auto& [code, count] : o.skipped) stats.skipped[code] += count;
    for (auto& [key, rec] : o.records) result.index.add(key, rec.first, rec.second);
  }
  stats.records = result.index.size();
  stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace raid::index
