#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "raid/dataset.hpp"
#include "raid/index.hpp"
#include "raid/verb_store.hpp"
#include "raid_app/wire.hpp"

namespace httplib {
class Server;
}

namespace raid::app {

struct ServiceOptions {
  /// Directory served under "/" for the UI bundle; empty disables it.
  std::string static_dir;
  /// Worker threads of the HTTP server.
  unsigned threads = 8;
};

/// HTTP adapter over the library. The index and dataset are read-only; the
/// verb store and relevance judgments are the only writable state.
class Service {
 public:
  Service(std::shared_ptr<const index::DescriptorIndex> index,
          std::shared_ptr<const dataset::Dataset> data, std::shared_ptr<verbs::VerbStore> verbs,
          ServiceOptions options = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds host:port; port 0 picks a free port. Returns the bound port or
  /// -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(); returns false if the server failed.
  bool run();
  void stop();
  void wait_until_ready() const;

  // Endpoint bodies, usable without a socket. Each returns the response
  // document and throws raid::Error on failure.
  json list_images(std::size_t limit, std::size_t offset) const;
  json get_image(const std::string& id) const;
  json post_descriptor(const json& body) const;
  json post_query(const json& body);
  json post_verb(const json& body);
  json list_verbs() const;
  json get_verb(const std::string& name) const;
  json post_feedback(const json& body);
  json get_precision(const std::string& query_id) const;

 private:
  struct QueryLog {
    std::vector<index::RecordKey> keys;
    std::map<std::size_t, bool> judgments;  // by 0-based rank
  };

  void routes();
  const index::DescriptorIndex& index() const;
  const dataset::Dataset& data() const;
  descriptor::Descriptor pair_descriptor(const json& pair) const;
  json precision_json(const std::string& id, const QueryLog& log) const;

  std::shared_ptr<const index::DescriptorIndex> index_;
  std::shared_ptr<const dataset::Dataset> data_;
  std::shared_ptr<verbs::VerbStore> verbs_;
  ServiceOptions options_;
  std::unique_ptr<httplib::Server> server_;

  mutable std::mutex log_mutex_;
  std::map<std::string, QueryLog> queries_;
  std::size_t next_query_ = 1;
};

}  // namespace raid::app
