#include "topic_grids/api.hpp"

#include <algorithm>
#include <charconv>
#include <iostream>
#include <numeric>
#include <optional>

#include <httplib.h>

#include "topic_grids/error.hpp"

namespace topic_grids {

namespace {

ApiResponse error(int status, const std::string& message) {
  return {status, {{"error", message}, {"status", status}}};
}

std::optional<std::string> param(const std::multimap<std::string, std::string>& query, const std::string& key) {
  const auto it = query.find(key);
  if (it == query.end()) return std::nullopt;
  return it->second;
}

std::optional<long> to_long(const std::string& s) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string> segments(const std::string& path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < path.size()) {
    const std::size_t next = path.find('/', pos);
    const std::size_t end = next == std::string::npos ? path.size() : next;
    if (end > pos) out.push_back(path.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

}  // namespace

ApiService::ApiService(std::shared_ptr<const Snapshot> snapshot) : snapshot_(std::move(snapshot)) {
  if (!snapshot_) throw DomainError("API needs a snapshot");
}

ApiResponse ApiService::handle(const std::string& path, const std::multimap<std::string, std::string>& query) const {
  const auto parts = segments(path);
  if (parts.size() < 2 || parts[0] != "api") return error(404, "no such endpoint");
  if (parts[1] == "meta" && parts.size() == 2) return {200, snapshot_->metadata};
  if (parts[1] == "users") {
    if (parts.size() == 2) return users();
    if (parts.size() == 4 && parts[3] == "grids") return grids(parts[2], query);
  }
  if (parts[1] == "topics" && (parts.size() == 3 || (parts.size() == 4 && parts[3] == "accesses"))) {
    const auto k = to_long(parts[2]);
    if (!k) return error(400, "topic index must be an integer");
    if (*k < 0 || *k >= snapshot_->model->K) return error(404, "unknown topic " + parts[2]);
    return parts.size() == 3 ? topic(static_cast<int>(*k)) : accesses(static_cast<int>(*k), query);
  }
  return error(404, "no such endpoint");
}

ApiResponse ApiService::users() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& [user, g] : snapshot_->grids) {
    list.push_back({{"id", user},
                    {"current_total", std::accumulate(g.current.begin(), g.current.end(), 0.0)},
                    {"self_risk", g.total_self_risk()},
                    {"peer_risk", g.total_peer_risk()}});
  }
  return {200,
          {{"users", list},
           {"window", snapshot_->metadata.at("window")},
           {"version", snapshot_->version}}};
}

ApiResponse ApiService::grids(const std::string& user, const std::multimap<std::string, std::string>& query) const {
  const auto it = snapshot_->grids.find(user);
  if (it == snapshot_->grids.end()) return error(404, "unknown user " + user);
  const auto window_text = param(query, "window");
  if (!window_text || window_text->empty() || *window_text == "default") return {200, to_json(it->second)};
  TimeWindow window;
  try {
    window = parse_window(*window_text);
  } catch (const std::exception& e) {
    return error(400, e.what());
  }
  if (window == snapshot_->window) return {200, to_json(it->second)};
  return {200, to_json(assemble_topic_grids(*snapshot_->index, snapshot_->placement, snapshot_->labels, user, window))};
}

ApiResponse ApiService::topic(int k) const {
  nlohmann::json words = nlohmann::json::array();
  for (const auto& [word, p] : top_words(*snapshot_->model, k, 10)) {
    words.push_back({{"word", word}, {"probability", p}});
  }
  const GridCoord cell = snapshot_->placement.cells[static_cast<std::size_t>(k)];
  return {200,
          {{"k", k},
           {"label", snapshot_->labels[static_cast<std::size_t>(k)]},
           {"col", cell.col},
           {"row", cell.row},
           {"words", words}}};
}

ApiResponse ApiService::accesses(int k, const std::multimap<std::string, std::string>& query) const {
  const ActivityIndex& index = *snapshot_->index;
  const auto user = param(query, "user");
  const auto scope_text = param(query, "scope");
  long offset = 0;
  long limit = kDefaultPageSize;
  if (const auto v = param(query, "offset")) {
    const auto parsed = to_long(*v);
    if (!parsed || *parsed < 0) return error(400, "offset must be a nonnegative integer");
    offset = *parsed;
  }
  if (const auto v = param(query, "limit")) {
    const auto parsed = to_long(*v);
    if (!parsed || *parsed < 1 || *parsed > kMaxPageSize) {
      return error(400, "limit must be an integer in [1, " + std::to_string(kMaxPageSize) + "]");
    }
    limit = *parsed;
  }
  if (user && !index.has_user(*user)) return error(404, "unknown user " + *user);
  if (scope_text && !user) return error(400, "scope requires a user");

  std::vector<std::size_t> candidates;
  if (scope_text) {
    Scope scope;
    try {
      scope = parse_scope(*scope_text);
    } catch (const std::exception& e) {
      return error(400, e.what());
    }
    candidates = index.select(*user, scope, snapshot_->window);
  } else {
    for (std::size_t i = 0; i < index.entries().size(); ++i) {
      if (!user || index.entries()[i].user == *user) candidates.push_back(i);
    }
  }
  std::vector<std::size_t> hits;
  for (std::size_t i : candidates) {
    if (index.dominant_topic(i) == k) hits.push_back(i);
  }
  std::sort(hits.begin(), hits.end(), [&](std::size_t a, std::size_t b) {
    const auto ta = index.entries()[a].ts;
    const auto tb = index.entries()[b].ts;
    return ta > tb || (ta == tb && a > b);
  });

  nlohmann::json list = nlohmann::json::array();
  for (std::size_t n = static_cast<std::size_t>(offset); n < hits.size() && list.size() < static_cast<std::size_t>(limit); ++n) {
    const std::size_t i = hits[n];
    auto item = to_json(index.entries()[i]);
    item["index"] = i;
    item["relevance"] = index.relevance(i)[static_cast<std::size_t>(k)];
    list.push_back(std::move(item));
  }
  nlohmann::json body = {{"k", k}, {"total", hits.size()}, {"offset", offset}, {"limit", limit}, {"accesses", list}};
  if (user) body["user"] = *user;
  if (scope_text) body["scope"] = *scope_text;
  return {200, body};
}

struct ApiServer::Impl {
  ApiService service;
  ServeOptions options;
  httplib::Server server;

  Impl(std::shared_ptr<const Snapshot> snapshot, ServeOptions opts)
      : service(std::move(snapshot)), options(std::move(opts)) {
    server.Get(R"(/api/.*)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::multimap<std::string, std::string> query(req.params.begin(), req.params.end());
      const ApiResponse out = service.handle(req.path, query);
      res.status = out.status;
      apply_cors(res);
      res.set_content(out.body.dump(), "application/json; charset=utf-8");
    });
    server.Options(R"(/api/.*)", [this](const httplib::Request&, httplib::Response& res) {
      apply_cors(res);
      res.status = 204;
    });
  }

  void apply_cors(httplib::Response& res) const {
    if (options.cors_origin.empty()) return;
    res.set_header("Access-Control-Allow-Origin", options.cors_origin);
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
  }
};

ApiServer::ApiServer(std::shared_ptr<const Snapshot> snapshot, ServeOptions options)
    : impl_(std::make_unique<Impl>(std::move(snapshot), std::move(options))) {}

ApiServer::~ApiServer() = default;

int ApiServer::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    o.port = impl_->server.bind_to_any_port(o.host);
    if (o.port < 0) throw std::runtime_error("cannot bind " + o.host);
  } else if (!impl_->server.bind_to_port(o.host, o.port)) {
    throw std::runtime_error("cannot listen on " + o.host + ":" + std::to_string(o.port));
  }
  return o.port;
}

void ApiServer::listen() {
  impl_->server.listen_after_bind();
}

void ApiServer::stop() { impl_->server.stop(); }

void serve_api(std::shared_ptr<const Snapshot> snapshot, const ServeOptions& options) {
  ApiServer server(std::move(snapshot), options);
  const int port = server.bind();
  std::clog << "serving snapshot on http://" << options.host << ":" << port << "\n";
  server.listen();
}

}  // namespace topic_grids
