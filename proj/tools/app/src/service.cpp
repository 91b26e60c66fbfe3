#include "raid_app/service.hpp"

#include <fmt/format.h>

#include <charconv>

#include "httplib.h"
#include "raid/retrieval_metrics.hpp"

namespace raid::app {

namespace {

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  json detail = nullptr;
  if (e.code() == ErrorCode::Parse) detail = {{"kind", "parse_error"}};
  send(res, http_status(e.code()), error_json(wire_code(e.code()), e.what(), detail));
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::BadRequest, fmt::format("request body is not valid JSON: {}", e.what()));
  }
}

std::size_t size_param(const httplib::Request& req, const char* name, std::size_t fallback) {
  if (!req.has_param(name)) return fallback;
  const std::string v = req.get_param_value(name);
  std::size_t out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) {
    throw Error(ErrorCode::BadRequest, fmt::format("'{}' must be a non-negative integer", name));
  }
  return out;
}

template <typename F>
httplib::Server::Handler guarded(F f, int ok_status = 200) {
  return [f, ok_status](const httplib::Request& req, httplib::Response& res) {
    try {
      send(res, ok_status, f(req));
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send(res, 400, error_json("bad_request", e.what()));
    }
  };
}

index::RecordKey key_from_json(const json& j) {
  return {require_string(j, "image_id"), require_string(j, "source_region_id"), {},
          require_string(j, "target_label")};
}

}  // namespace

Service::Service(std::shared_ptr<const index::DescriptorIndex> index,
                 std::shared_ptr<const dataset::Dataset> data,
                 std::shared_ptr<verbs::VerbStore> verbs, ServiceOptions options)
    : index_(std::move(index)),
      data_(std::move(data)),
      verbs_(verbs ? std::move(verbs) : std::make_shared<verbs::VerbStore>()),
      options_(std::move(options)),
      server_(std::make_unique<httplib::Server>()) {
  routes();
}

Service::~Service() { stop(); }

const index::DescriptorIndex& Service::index() const {
  if (!index_) throw Error(ErrorCode::BadRequest, "the service was started without an index");
  return *index_;
}

const dataset::Dataset& Service::data() const {
  if (!data_) throw Error(ErrorCode::BadRequest, "the service was started without annotations");
  return *data_;
}

void Service::routes() {
  auto& s = *server_;
  const unsigned threads = std::max(1u, options_.threads);
  s.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  if (!options_.static_dir.empty()) s.set_mount_point("/", options_.static_dir);

  s.Get("/images", guarded([this](const httplib::Request& req) {
          return list_images(size_param(req, "limit", 50), size_param(req, "offset", 0));
        }));
  s.Get(R"(/images/([^/]+))",
        guarded([this](const httplib::Request& req) { return get_image(req.matches[1]); }));
  s.Post("/descriptor",
         guarded([this](const httplib::Request& req) { return post_descriptor(parse_body(req)); }));
  s.Post("/query", guarded([this](const httplib::Request& req) { return post_query(parse_body(req)); }));
  s.Post("/verbs", guarded([this](const httplib::Request& req) { return post_verb(parse_body(req)); }, 201));
  s.Get("/verbs", guarded([this](const httplib::Request&) { return list_verbs(); }));
  s.Get(R"(/verbs/([^/]+))",
        guarded([this](const httplib::Request& req) { return get_verb(req.matches[1]); }));
  s.Post("/feedback",
         guarded([this](const httplib::Request& req) { return post_feedback(parse_body(req)); }));
  s.Get(R"(/queries/([^/]+)/precision)",
        guarded([this](const httplib::Request& req) { return get_precision(req.matches[1]); }));

  s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const std::string code = res.status == 404 ? "not_found" : res.status < 500 ? "bad_request" : "internal_error";
    res.set_content(error_json(code, fmt::format("no route for {} {}", req.method, req.path)).dump(),
                    "application/json");
  });
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "unknown error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send(res, 500, error_json("internal_error", what));
  });
}

int Service::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool Service::run() { return server_->listen_after_bind(); }
void Service::stop() {
  if (server_) server_->stop();
}
void Service::wait_until_ready() const { server_->wait_until_ready(); }

json Service::list_images(std::size_t limit, std::size_t offset) const {
  const auto& images = data().images;
  json items = json::array();
  for (std::size_t i = offset; i < images.size() && i - offset < limit; ++i) {
    items.push_back(image_summary_json(images[i]));
  }
  return {{"total", images.size()}, {"offset", offset}, {"limit", limit}, {"images", items}};
}

json Service::get_image(const std::string& id) const {
  const auto* image = data().find_image(id);
  if (image == nullptr) throw Error(ErrorCode::NotFound, fmt::format("unknown image '{}'", id));
  return image_detail_json(*image);
}

json Service::post_descriptor(const json& body) const {
  const descriptor::DescriptorConfig cfg = index_ ? index_->config() : descriptor::DescriptorConfig{};
  return descriptor_to_json(compute_sketch(sketch_from_json(body), cfg));
}

descriptor::Descriptor Service::pair_descriptor(const json& pair) const {
  const auto key = key_from_json(pair);
  const auto i = index().find(key.image_id, key.source_region_id, key.target_label);
  if (!i) {
    throw Error(ErrorCode::NotFound, fmt::format("pair ({}, {}, {}) is not in the index", key.image_id,
                                                 key.source_region_id, key.target_label));
  }
  return index().descriptor(*i);
}

json Service::post_query(const json& body) {
  if (!body.is_object()) throw Error(ErrorCode::BadRequest, "request body must be an object");
  int sources = 0;
  for (const char* f : {"descriptor", "verb", "pair", "sketch"}) {
    if (body.contains(f) && !body[f].is_null()) ++sources;
  }
  if (sources != 1) {
    throw Error(ErrorCode::BadRequest,
                fmt::format("give exactly one of descriptor, verb, pair or sketch (got {})", sources));
  }
  const auto& idx = index();
  index::QuerySpec spec;
  if (body.contains("descriptor") && !body["descriptor"].is_null()) {
    spec.descriptor = descriptor_from_json(body["descriptor"], &idx);
  } else if (auto verb = optional_string(body, "verb")) {
    spec.descriptor = verbs_->lookup(*verb).descriptor;
  } else if (body.contains("pair") && !body["pair"].is_null()) {
    spec.descriptor = pair_descriptor(body["pair"]);
  } else {
    auto sketch = sketch_from_json(body["sketch"]);
    sketch.kind = idx.kind();
    spec.descriptor = compute_sketch(sketch, idx.config());
  }
  spec.source_label = optional_string(body, "source_label");
  spec.target_label = optional_string(body, "target_label");
  if (body.contains("min_area_fraction")) spec.min_area_fraction = require_number(body, "min_area_fraction");
  if (body.contains("top_n")) {
    const auto& t = body["top_n"];
    if (!t.is_number_integer()) throw Error(ErrorCode::BadRequest, "'top_n' must be an integer");
    spec.top_n = t.get<int>();
  }

  const auto results = idx.query(spec);
  QueryLog log;
  for (const auto& r : results) log.keys.push_back(idx.key(r.record));
  std::string id;
  {
    std::lock_guard lock(log_mutex_);
    id = fmt::format("q{}", next_query_++);
    queries_.emplace(id, std::move(log));
  }
  return {{"query_id", id},
          {"descriptor_kind", std::string(descriptor::to_string(idx.kind()))},
          {"count", results.size()},
          {"results", results_to_json(idx, results, data_.get())}};
}

json Service::post_verb(const json& body) {
  const std::string name = require_string(body, "verb");
  descriptor::Descriptor d;
  std::string from = optional_string(body, "created_from").value_or("");
  if (body.contains("descriptor") && !body["descriptor"].is_null()) {
    d = descriptor_from_json(body["descriptor"], index_.get());
    if (from.empty()) from = "inline descriptor";
  } else if (body.contains("pair") && !body["pair"].is_null()) {
    d = pair_descriptor(body["pair"]);
    if (from.empty()) {
      const auto k = key_from_json(body["pair"]);
      from = fmt::format("image {} region {} target {}", k.image_id, k.source_region_id, k.target_label);
    }
  } else {
    throw Error(ErrorCode::BadRequest, "give a descriptor or a pair for the verb");
  }
  return verb_detail_json(verbs_->save(name, d, from));
}

json Service::list_verbs() const {
  json items = json::array();
  for (const auto& e : verbs_->list()) items.push_back(verb_summary_json(e));
  return {{"verbs", items}};
}

json Service::get_verb(const std::string& name) const { return verb_detail_json(verbs_->lookup(name)); }

json Service::precision_json(const std::string& id, const QueryLog& log) const {
  std::vector<bool> judged;
  for (std::size_t r = 0; r < log.keys.size(); ++r) {
    auto it = log.judgments.find(r);
    if (it == log.judgments.end()) break;
    judged.push_back(it->second);
  }
  json curve = json::array();
  for (const auto& p : metrics::precision_at_n(judged)) {
    curve.push_back({{"n", p.n}, {"precision", p.precision}});
  }
  return {{"query_id", id}, {"results", log.keys.size()}, {"judged", judged.size()}, {"precision", curve}};
}

json Service::post_feedback(const json& body) {
  const std::string id = require_string(body, "query_id");
  const auto key = key_from_json(require(body, "result"));
  const auto& rel = require(body, "relevant");
  if (!rel.is_boolean()) throw Error(ErrorCode::BadRequest, "'relevant' must be a boolean");
  std::lock_guard lock(log_mutex_);
  auto it = queries_.find(id);
  if (it == queries_.end()) throw Error(ErrorCode::NotFound, fmt::format("unknown query '{}'", id));
  auto& log = it->second;
  for (std::size_t r = 0; r < log.keys.size(); ++r) {
    const auto& k = log.keys[r];
    if (k.image_id == key.image_id && k.source_region_id == key.source_region_id &&
        k.target_label == key.target_label) {
      log.judgments[r] = rel.get<bool>();
      return precision_json(id, log);
    }
  }
  throw Error(ErrorCode::NotFound, fmt::format("query '{}' has no such result", id));
}

json Service::get_precision(const std::string& query_id) const {
  std::lock_guard lock(log_mutex_);
  auto it = queries_.find(query_id);
  if (it == queries_.end()) throw Error(ErrorCode::NotFound, fmt::format("unknown query '{}'", query_id));
  return precision_json(query_id, it->second);
}

}  // namespace raid::app
