#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "raid/dataset.hpp"
#include "raid/descriptor.hpp"

namespace raid::index {

using descriptor::Descriptor;
using descriptor::DescriptorConfig;
using descriptor::DescriptorKind;
using descriptor::DescriptorShape;

/// RAID or baseline descriptor of one pair, by kind.
Descriptor compute_descriptor(DescriptorKind kind, const geometry::PolygonSet& source,
                              const geometry::PolygonSet& target,
                              const descriptor::ImageFrame& frame,
                              const DescriptorConfig& cfg = {},
                              descriptor::PointHistogramCache* cache = nullptr);

/// Shape a descriptor of this kind has under cfg.
DescriptorShape shape_for(DescriptorKind kind, const DescriptorConfig& cfg);

struct RecordKey {
  std::string image_id;
  std::string source_region_id;
  std::string source_label;
  std::string target_label;

  friend bool operator==(const RecordKey&, const RecordKey&) = default;
};

struct QuerySpec {
  Descriptor descriptor;
  std::optional<std::string> source_label;
  std::optional<std::string> target_label;
  /// Records whose source covers less than this fraction of the image are
  /// skipped. Values above 1 select nothing.
  double min_area_fraction = 0.01;
  int top_n = 20;

  void validate() const;
};

struct QueryResult {
  std::size_t record = 0;
  double distance = 0.0;
};

/// Descriptor table of a dataset. Record metadata refers to one string
/// table; descriptor values are stored as float32, contiguous per record.
class DescriptorIndex {
 public:
  DescriptorIndex() = default;
  DescriptorIndex(DescriptorConfig config, DescriptorKind kind, std::string dataset_digest);

  const DescriptorConfig& config() const { return config_; }
  DescriptorKind kind() const { return kind_; }
  DescriptorShape shape() const { return shape_; }
  std::size_t dims() const { return dims_; }
  const std::string& dataset_digest() const { return digest_; }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  RecordKey key(std::size_t i) const;
  const std::string& image_id(std::size_t i) const;
  const std::string& source_region_id(std::size_t i) const;
  const std::string& source_label(std::size_t i) const;
  const std::string& target_label(std::size_t i) const;
  float area_fraction(std::size_t i) const { return records_.at(i).area_fraction; }
  float r_max(std::size_t i) const { return records_.at(i).r_max; }
  std::span<const float> values(std::size_t i) const;
  /// Record i widened back to a Descriptor.
  Descriptor descriptor(std::size_t i) const;

  /// Appends a record. The descriptor must match the index kind and shape.
  void add(const RecordKey& key, double area_fraction, const Descriptor& d);

  std::optional<std::size_t> find(std::string_view image_id, std::string_view source_region_id,
                                  std::string_view target_label) const;

  /// Records passing the filters, ascending by L1 distance, ties broken by
  /// (image_id, source_region_id, target_label). The query is rounded to
  /// float32 first, so a stored descriptor finds itself at distance 0.
  /// Throws ConfigMismatch when the descriptor kind or shape differs.
  std::vector<QueryResult> query(const QuerySpec& spec) const;

  /// Binary image: "RAIDIDX1", u32 header length, JSON header, records.
  std::string serialize() const;
  static DescriptorIndex deserialize(std::string_view bytes, std::string_view source_name = "<memory>");
  void save(const std::filesystem::path& path) const;
  static DescriptorIndex load(const std::filesystem::path& path);

 private:
  struct Record {
    std::uint32_t image = 0;
    std::uint32_t region = 0;
    std::uint32_t source_label = 0;
    std::uint32_t target_label = 0;
    float area_fraction = 0.0f;
    float r_max = 0.0f;
  };

  std::uint32_t intern(const std::string& s);
  bool key_less(std::size_t a, std::size_t b) const;

  DescriptorConfig config_;
  DescriptorKind kind_ = DescriptorKind::Raid;
  DescriptorShape shape_{8, 2, 8, 2};
  std::size_t dims_ = 256;
  std::string digest_;
  std::vector<std::string> strings_;
  std::map<std::string, std::uint32_t, std::less<>> string_ids_;
  std::vector<Record> records_;
  std::vector<float> values_;
};

struct BuildOptions {
  DescriptorKind kind = DescriptorKind::Raid;
  unsigned threads = 1;
  std::optional<std::string> source_label;
};

struct BuildStats {
  std::size_t images = 0;
  std::size_t candidates = 0;
  std::size_t records = 0;
  /// Candidates rejected by descriptor preconditions, by error code name.
  std::map<std::string, std::size_t> skipped;
  double seconds = 0.0;

  std::size_t skipped_total() const;
};

struct BuildResult {
  DescriptorIndex index;
  BuildStats stats;
};

/// One record per relationship candidate of the dataset. Images are spread
/// over worker threads; records are merged in image order, so the output is
/// identical for any thread count.
BuildResult build_index(const dataset::Dataset& data, const DescriptorConfig& cfg = {},
                        const BuildOptions& options = {});

}  // namespace raid::index
