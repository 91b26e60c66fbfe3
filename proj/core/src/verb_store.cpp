#include "raid/verb_store.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include "json.hpp"
#include "raid/base64.hpp"
#include "raid/error.hpp"

namespace raid::verbs {

using nlohmann::json;

namespace {

std::string pack(const std::vector<double>& values) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(values.size() * 8);
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  }
  return base64::encode(bytes);
}

std::vector<double> unpack(std::string_view text) {
  const auto bytes = base64::decode(text);
  if (bytes.size() % 8 != 0) throw Error(ErrorCode::Parse, "descriptor payload is not float64 data");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

}  // namespace

std::string VerbStore::format(const std::vector<VerbEntry>& entries) {
  json list = json::array();
  for (const auto& e : entries) {
    list.push_back({{"verb", e.verb},
                    {"kind", std::string(descriptor::to_string(e.descriptor.kind))},
                    {"shape", e.descriptor.shape},
                    {"r_max", e.descriptor.r_max},
                    {"created_from", e.created_from},
                    {"values_f64_base64", pack(e.descriptor.values)}});
  }
  return json{{"format", "raid-verbs-1"}, {"verbs", list}}.dump(2) + "\n";
}

std::vector<VerbEntry> VerbStore::parse(std::string_view text, std::string_view source_name) {
  std::vector<VerbEntry> out;
  try {
    const json doc = json::parse(text);
    const auto& list = doc.at("verbs");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& j = list[i];
      VerbEntry e;
      e.verb = j.at("verb").get<std::string>();
      e.descriptor.kind = descriptor::parse_kind(j.at("kind").get<std::string>());
      e.descriptor.shape = j.at("shape").get<descriptor::DescriptorShape>();
      e.descriptor.r_max = j.at("r_max").get<double>();
      e.created_from = j.value("created_from", "");
      e.descriptor.values = unpack(j.at("values_f64_base64").get<std::string>());
      const auto& s = e.descriptor.shape;
      if (e.descriptor.values.size() != static_cast<std::size_t>(s[0]) * s[1] * s[2] * s[3]) {
        throw Error(ErrorCode::Parse, fmt::format("verbs[{}]: value count does not match shape", i));
      }
      out.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, fmt::format("{}: bad verb store: {}", source_name, e.what()));
  } catch (const Error& e) {
    throw Error(ErrorCode::Parse, fmt::format("{}: {}", source_name, e.what()));
  }
  return out;
}

VerbStore::VerbStore(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (!std::filesystem::exists(*path_, ec)) return;
  std::ifstream in(*path_, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open verb store " + path_->string());
  std::ostringstream buf;
  buf << in.rdbuf();
  for (auto& e : parse(buf.str(), path_->string())) {
    const std::string name = e.verb;
    if (!entries_.emplace(name, std::move(e)).second) {
      throw Error(ErrorCode::Parse, fmt::format("{}: duplicate verb '{}'", path_->string(), name));
    }
  }
}

VerbEntry VerbStore::save(std::string_view verb, const descriptor::Descriptor& d,
                          std::string_view created_from) {
  if (verb.empty()) throw Error(ErrorCode::BadRequest, "verb name must not be empty");
  if (d.values.empty()) throw Error(ErrorCode::BadRequest, "descriptor must not be empty");
  std::unique_lock lock(mutex_);
  if (entries_.find(verb) != entries_.end()) {
    throw Error(ErrorCode::Conflict, fmt::format("verb '{}' already exists", verb));
  }
  VerbEntry e{std::string(verb), d, std::string(created_from)};
  auto it = entries_.emplace(e.verb, e).first;
  try {
    write_locked();
  } catch (...) {
    entries_.erase(it);
    throw;
  }
  return e;
}

VerbEntry VerbStore::lookup(std::string_view verb) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(verb);
  if (it == entries_.end()) throw Error(ErrorCode::NotFound, fmt::format("unknown verb '{}'", verb));
  return it->second;
}

std::vector<VerbEntry> VerbStore::list() const {
  std::shared_lock lock(mutex_);
  std::vector<VerbEntry> out;
  for (const auto& [name, e] : entries_) out.push_back(e);
  return out;
}

std::size_t VerbStore::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void VerbStore::write_locked() const {
  if (!path_) return;
  std::vector<VerbEntry> all;
  for (const auto& [name, e] : entries_) all.push_back(e);
  const std::string text = format(all);
  auto tmp = *path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write verb store " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorCode::Io, "cannot write verb store " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, *path_, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot replace verb store " + path_->string() + ": " + ec.message());
}

}  // namespace raid::verbs
