#pragma once

// Read-only HTTP API over an immutable evaluation snapshot.
//
//   GET  /healthz
//   GET  /api/models | /api/results | /api/profiles
//   GET  /api/charts/{kind}?top=N&metric=M&profile=P
//   POST /api/rank       {weights|profile, prompt_type, cohort_scope, renormalize}
//   POST /api/recommend  {profile}
//   POST /api/reload

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "t2ibench/cohort_metrics.hpp"
#include "t2ibench/scoring.hpp"

namespace httplib {
class Server;
}

namespace t2ibench {

struct SnapshotSource {
  std::filesystem::path results_csv;  // preferred when set
  std::filesystem::path dataset;
  std::filesystem::path profile_dir;
  CohortMetricOptions metric_options;
};

struct Snapshot {
  std::vector<RawMetricRow> rows;
  nlohmann::ordered_json summary;
  ProfileRegistry registry;
};

std::shared_ptr<const Snapshot> load_snapshot(const SnapshotSource& source);

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

using QueryParams = std::map<std::string, std::string>;

class Service {
 public:
  // Throws when the initial snapshot cannot be loaded.
  explicit Service(SnapshotSource source);

  HttpResponse handle(std::string_view method, std::string_view path, const QueryParams& query,
                      std::string_view body);

  std::shared_ptr<const Snapshot> snapshot() const;
  // Loads a fresh snapshot and swaps it in; on failure the old one stays.
  void reload();

 private:
  HttpResponse rank(const Snapshot& snap, std::string_view body) const;
  HttpResponse recommend(const Snapshot& snap, std::string_view body) const;
  HttpResponse chart(const Snapshot& snap, std::string_view kind, const QueryParams& query) const;

  SnapshotSource source_;
  mutable std::mutex mu_;
  std::shared_ptr<const Snapshot> snapshot_;
};

// Runs the service on a background httplib server.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds (port 0 picks a free port) and starts serving; returns the bound port.
  int start(const std::string& host, int port);
  // Blocks until stop() is called from another thread.
  void wait();
  void stop();

 private:
  Service& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace t2ibench
