#pragma once

#include <map>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "topic_grids/snapshot.hpp"

namespace topic_grids {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Read-only JSON API over a published snapshot. Every response is a pure
// function of the snapshot and the request.
//
//   GET /api/meta
//   GET /api/users
//   GET /api/users/{id}/grids[?window=START/END]
//   GET /api/topics/{k}
//   GET /api/topics/{k}/accesses[?user=&scope=&offset=&limit=]
class ApiService {
 public:
  static constexpr int kDefaultPageSize = 50;
  static constexpr int kMaxPageSize = 500;

  explicit ApiService(std::shared_ptr<const Snapshot> snapshot);

  ApiResponse handle(const std::string& path, const std::multimap<std::string, std::string>& query) const;

 private:
  ApiResponse users() const;
  ApiResponse grids(const std::string& user, const std::multimap<std::string, std::string>& query) const;
  ApiResponse topic(int k) const;
  ApiResponse accesses(int k, const std::multimap<std::string, std::string>& query) const;

  std::shared_ptr<const Snapshot> snapshot_;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin;  // empty: no CORS header
};

// HTTP front end for ApiService. Port 0 binds an ephemeral port.
class ApiServer {
 public:
  ApiServer(std::shared_ptr<const Snapshot> snapshot, ServeOptions options);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Binds the socket; returns the bound port.
  int bind();
  // Blocks until stop() is called from another thread.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Binds and blocks until the server stops.
void serve_api(std::shared_ptr<const Snapshot> snapshot, const ServeOptions& options);

}  // namespace topic_grids
