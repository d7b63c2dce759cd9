#pragma once

// Read-only JSON HTTP API over a loaded model.
//
//   GET  /api/v1/model
//   GET  /api/v1/assets
//   GET  /api/v1/losses
//   GET  /api/v1/hazards
//   GET  /api/v1/hazards/{id}/chains?profile=&max_depth=
//   GET  /api/v1/hazards/{id}/coverage?profile=&max_depth=&thin_threshold=
//   GET  /api/v1/graph/merged?profile=&max_depth=
//   GET  /api/v1/protections/ranking?profile=&max_depth=
//   POST /api/v1/whatif   {hazard, profile?, scenario?, max_depth?, thin_threshold?}
//
// A missing profile means the combined attacker ("*").

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "attackmap/analysis.hpp"
#include "attackmap/model.hpp"

namespace attackmap {

struct HttpRequest {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;
};

struct ServiceConfig {
  std::string cors_origin = "*";
  PipelineOptions defaults;
};

class Service {
 public:
  Service(Model model, ServiceConfig config = {});
  ~Service();

  HttpResponse handle(const HttpRequest& request) const;

  // Replaces the whole snapshot; in-flight requests keep the old one.
  void reload(Model model);

  const ServiceConfig& config() const { return config_; }

  struct Snapshot;

 private:
  std::shared_ptr<const Snapshot> snapshot() const;

  ServiceConfig config_;
  mutable std::mutex mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
};

// Binds a Service to a listening socket (cpp-httplib underneath).
class HttpServer {
 public:
  explicit HttpServer(const Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // port 0 binds an ephemeral port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// "host:port" -> pair; throws InvalidArgumentError.
std::pair<std::string, int> parse_listen_address(std::string_view address);

}  // namespace attackmap
