#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "raid/descriptor.hpp"

namespace raid::verbs {

struct VerbEntry {
  std::string verb;
  descriptor::Descriptor descriptor;
  /// Free-form note on where the descriptor came from.
  std::string created_from;
};

/// Named descriptors persisted as a JSON document with base64 float64
/// payloads. Every save rewrites the file through a temporary sibling, so
/// readers never see a partial file. Safe for concurrent use.
class VerbStore {
 public:
  /// In-memory store that is never written.
  VerbStore() = default;
  /// Loads path if it exists; saves are written back to it.
  explicit VerbStore(std::filesystem::path path);

  /// Throws BadRequest for an empty name or descriptor, Conflict when the
  /// name is taken.
  VerbEntry save(std::string_view verb, const descriptor::Descriptor& d,
                 std::string_view created_from = {});
  /// Throws NotFound.
  VerbEntry lookup(std::string_view verb) const;
  std::vector<VerbEntry> list() const;
  std::size_t size() const;

  static std::string format(const std::vector<VerbEntry>& entries);
  static std::vector<VerbEntry> parse(std::string_view text, std::string_view source_name = "<memory>");

 private:
  void write_locked() const;

  std::optional<std::filesystem::path> path_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, VerbEntry, std::less<>> entries_;
};

}  // namespace raid::verbs
