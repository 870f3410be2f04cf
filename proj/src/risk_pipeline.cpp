#include "topic_grids/risk_pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "topic_grids/error.hpp"

namespace topic_grids {

namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  const auto res = std::from_chars(text.data() + pos, text.data() + pos + len, out);
  return res.ec == std::errc{};
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  int y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
  const bool shape = text.size() >= 20 && text[4] == '-' && text[7] == '-' &&
                     (text[10] == 'T' || text[10] == ' ') && text[13] == ':' && text[16] == ':';
  const std::string_view zone = text.size() >= 19 ? text.substr(19) : std::string_view{};
  if (!shape || !read_int(text, 0, 4, y) || !read_int(text, 5, 2, mo) || !read_int(text, 8, 2, d) ||
      !read_int(text, 11, 2, hh) || !read_int(text, 14, 2, mm) || !read_int(text, 17, 2, ss) ||
      (zone != "Z" && zone != "+00:00")) {
    throw DomainError("timestamp '" + std::string(text) + "' is not YYYY-MM-DDTHH:MM:SSZ");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) {
    throw DomainError("timestamp '" + std::string(text) + "' is out of range");
  }
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<Timestamp>(days) * 86400 + hh * 3600 + mm * 60 + ss;
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  Timestamp days = ts / 86400;
  Timestamp rem = ts % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
  return buf;
}

nlohmann::json to_json(const LogEntry& entry) {
  nlohmann::json j = {{"ts", format_timestamp(entry.ts)},
                      {"user", entry.user},
                      {"action", entry.action},
                      {"path", entry.path}};
  if (!entry.meta.empty()) j["meta"] = entry.meta;
  if (entry.group) j["group"] = *entry.group;
  return j;
}

LogEntry log_entry_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("log line is not a JSON object");
  auto required = [&](const char* key) -> std::string {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
      throw DomainError(std::string("missing or non-string field '") + key + "'");
    }
    return it->get<std::string>();
  };
  auto optional = [&](const char* key) -> std::optional<std::string> {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw DomainError(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
  };
  LogEntry e;
  e.ts = parse_timestamp(required("ts"));
  e.user = required("user");
  if (e.user.empty()) throw DomainError("field 'user' is empty");
  e.action = required("action");
  e.path = optional("path").value_or("");
  e.meta = optional("meta").value_or("");
  e.group = optional("group");
  if (e.group && e.group->empty()) e.group.reset();
  return e;
}

ParsedLog parse_log(std::string_view jsonl, double max_malformed_fraction) {
  ParsedLog out;
  std::size_t line_no = 0;
  std::size_t nonblank = 0;
  std::size_t pos = 0;
  while (pos <= jsonl.size()) {
    const std::size_t nl = jsonl.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? jsonl.size() : nl;
    std::string_view line = jsonl.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (nl == std::string_view::npos) break;
      continue;
    }
    ++nonblank;
    try {
      out.entries.push_back(log_entry_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      out.failures.push_back({line_no, e.what()});
    }
    if (nl == std::string_view::npos) break;
  }
  if (nonblank == 0) throw IngestError("log is empty");
  const double bad = static_cast<double>(out.failures.size()) / static_cast<double>(nonblank);
  if (bad > max_malformed_fraction) {
    throw IngestError(std::to_string(out.failures.size()) + " of " + std::to_string(nonblank) +
                      " log lines are malformed (first at line " +
                      std::to_string(out.failures.front().line) + ": " + out.failures.front().reason + ")");
  }
  if (out.entries.empty()) throw IngestError("log has no valid entries");
  return out;
}

std::string content_document(const LogEntry& entry) {
  if (entry.meta.empty()) return entry.path;
  if (entry.path.empty()) return entry.meta;
  return entry.path + " " + entry.meta;
}

Scope parse_scope(std::string_view name) {
  if (name == "current" || name == "CURRENT") return Scope::kCurrent;
  if (name == "self_history" || name == "SELF_HISTORY") return Scope::kSelfHistory;
  if (name == "peer_history" || name == "PEER_HISTORY") return Scope::kPeerHistory;
  throw DomainError("unknown scope '" + std::string(name) + "'");
}

std::string to_string(Scope scope) {
  switch (scope) {
    case Scope::kCurrent:
      return "current";
    case Scope::kSelfHistory:
      return "self_history";
    case Scope::kPeerHistory:
      return "peer_history";
  }
  return "current";
}

ActivityIndex::ActivityIndex(std::vector<LogEntry> entries, std::shared_ptr<const TopicModel> model,
                             TimeWindow period)
    : entries_(std::move(entries)), model_(std::move(model)), period_(period) {
  if (!model_) throw DomainError("activity index needs a fitted model");
  // Relevance is keyed by the content document itself, so repeated
  // accesses to the same content share one vector.
  std::map<std::string, std::size_t, std::less<>> doc_ids;
  doc_of_entry_.reserve(entries_.size());
  for (const auto& e : entries_) {
    std::string doc = content_document(e);
    auto [it, inserted] = doc_ids.try_emplace(doc, doc_relevance_.size());
    if (inserted) {
      const TermCounts counts = to_term_counts(doc, model_->vocabulary);
      doc_relevance_.push_back(counts.empty() ? std::vector<double>{}
                                              : doc_topic_relevance(*model_, counts, doc));
    }
    doc_of_entry_.push_back(it->second);

    auto& group = user_group_[e.user];
    if (e.group && !group) group = e.group;
  }
}

const std::vector<double>& ActivityIndex::relevance(std::size_t entry) const {
  return doc_relevance_[doc_of_entry_.at(entry)];
}

int ActivityIndex::dominant_topic(std::size_t entry) const {
  const auto& r = relevance(entry);
  if (r.empty()) return -1;
  return static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
}

std::vector<std::string> ActivityIndex::users() const {
  std::vector<std::string> out;
  for (const auto& [user, group] : user_group_) out.push_back(user);
  return out;
}

bool ActivityIndex::has_user(std::string_view user) const { return user_group_.find(user) != user_group_.end(); }

std::vector<std::string> ActivityIndex::peers_of(std::string_view user) const {
  const auto it = user_group_.find(user);
  const std::optional<std::string> group = it != user_group_.end() ? it->second : std::nullopt;
  std::vector<std::string> out;
  for (const auto& [other, other_group] : user_group_) {
    if (other == user) continue;
    if (!group || other_group == group) out.push_back(other);
  }
  return out;
}

std::vector<std::size_t> ActivityIndex::select(std::string_view user, Scope scope,
                                               const TimeWindow& window) const {
  std::vector<std::size_t> out;
  std::set<std::string, std::less<>> peers;
  if (scope == Scope::kPeerHistory) {
    for (auto& p : peers_of(user)) peers.insert(std::move(p));
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const LogEntry& e = entries_[i];
    bool match = false;
    switch (scope) {
      case Scope::kCurrent:
        match = e.user == user && window.contains(e.ts);
        break;
      case Scope::kSelfHistory:
        match = e.user == user && e.ts >= period_.start && e.ts < std::min(window.start, period_.end);
        break;
      case Scope::kPeerHistory:
        match = peers.count(e.user) > 0 && e.ts >= period_.start && e.ts < std::min(window.end, period_.end);
        break;
    }
    if (match) out.push_back(i);
  }
  return out;
}

ActivityVector activity_vector(const ActivityIndex& index, std::string_view user, Scope scope,
                               const TimeWindow& window) {
  if (window.empty()) throw DomainError("activity window is empty");
  ActivityVector v;
  v.user = std::string(user);
  v.scope = scope;
  v.window = window;
  v.mass.assign(static_cast<std::size_t>(index.topics()), 0.0);
  for (std::size_t i : index.select(user, scope, window)) {
    const auto& r = index.relevance(i);
    for (std::size_t k = 0; k < r.size(); ++k) v.mass[k] += r[k];
  }
  return v;
}

std::vector<double> smoothed_distribution(std::span<const double> mass, double epsilon) {
  double total = 0.0;
  for (double m : mass) {
    if (!(m >= 0.0)) throw DomainError("activity mass must be nonnegative");
    total += m;
  }
  const double denom = total + epsilon * static_cast<double>(mass.size());
  std::vector<double> out(mass.size());
  for (std::size_t k = 0; k < mass.size(); ++k) out[k] = (mass[k] + epsilon) / denom;
  return out;
}

std::vector<double> OneSidedTotalVariation::compare(std::span<const double> current,
                                                    std::span<const double> baseline) const {
  if (current.size() != baseline.size()) {
    throw DomainError("risk comparison needs equal topic counts: " + std::to_string(current.size()) +
                      " vs " + std::to_string(baseline.size()));
  }
  const auto c = smoothed_distribution(current, epsilon_);
  const auto b = smoothed_distribution(baseline, epsilon_);
  std::vector<double> risk(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) risk[k] = std::max(0.0, c[k] - b[k]);
  return risk;
}

std::vector<double> risk_vector(const ActivityVector& current, const ActivityVector& baseline,
                                const RiskComparison& comparison) {
  return comparison.compare(current.mass, baseline.mass);
}

double TopicGridSet::total_self_risk() const { return std::accumulate(self_risk.begin(), self_risk.end(), 0.0); }
double TopicGridSet::total_peer_risk() const { return std::accumulate(peer_risk.begin(), peer_risk.end(), 0.0); }

TopicGridSet assemble_topic_grids(const ActivityIndex& index, const Placement& placement,
                                  const std::vector<std::string>& labels, std::string_view user,
                                  const TimeWindow& window, const RiskComparison& comparison) {
  const auto K = static_cast<std::size_t>(index.topics());
  if (placement.size() != K) {
    throw DomainError("placement covers " + std::to_string(placement.size()) + " topics, model has " +
                      std::to_string(K));
  }
  if (labels.size() != K) throw DomainError("need one label per topic");

  const auto current = activity_vector(index, user, Scope::kCurrent, window);
  const auto self = activity_vector(index, user, Scope::kSelfHistory, window);
  const auto peer = activity_vector(index, user, Scope::kPeerHistory, window);

  TopicGridSet g;
  g.user = std::string(user);
  g.window = window;
  g.placement = placement;
  g.labels = labels;
  g.current = current.mass;
  g.self_history = self.mass;
  g.peer_history = peer.mass;
  const bool idle = std::all_of(g.current.begin(), g.current.end(), [](double m) { return m == 0.0; });
  if (idle) {
    g.self_risk.assign(K, 0.0);
    g.peer_risk.assign(K, 0.0);
  } else {
    g.self_risk = risk_vector(current, self, comparison);
    g.peer_risk = risk_vector(current, peer, comparison);
  }
  return g;
}

Placement build_topic_placement(const TopicModel& model, DistanceMetric metric,
                                const EmbeddingConfig& embedding) {
  const int h = grid_exponent_for(static_cast<std::size_t>(model.K));
  if (h < 0) throw SizeError("size must be a power of 4: the model has " + std::to_string(model.K) + " topics");
  if (model.K == 1) return split_diffuse(std::vector<Point2D>{{0.0, 0.0}}, 0);
  if (model.K < 4) throw SizeError("need at least 4 topics for a grid");
  const auto points = embed(topic_distance_matrix(model, metric), embedding);
  return split_diffuse(points, h);
}

nlohmann::json to_json(const TopicGridSet& g) {
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t k = 0; k < g.current.size(); ++k) {
    cells.push_back({{"k", k},
                     {"col", g.placement.cells[k].col},
                     {"row", g.placement.cells[k].row},
                     {"label", g.labels[k]},
                     {"current", g.current[k]},
                     {"self_history", g.self_history[k]},
                     {"self_risk", g.self_risk[k]},
                     {"peer_history", g.peer_history[k]},
                     {"peer_risk", g.peer_risk[k]}});
  }
  return {{"user", g.user},
          {"window", {{"start", format_timestamp(g.window.start)}, {"end", format_timestamp(g.window.end)}}},
          {"h", g.placement.h},
          {"cells", cells},
          {"totals", {{"self_risk", g.total_self_risk()}, {"peer_risk", g.total_peer_risk()}}}};
}

std::string render_svg(const TopicGridSet& g) {
  constexpr int kCell = 36;
  constexpr int kGap = 24;
  constexpr int kTitle = 22;
  const int side = g.placement.side();
  const int panel = side * kCell;
  const std::vector<std::pair<const char*, const std::vector<double>*>> channels = {
      {"current", &g.current},
      {"self history", &g.self_history},
      {"self risk", &g.self_risk},
      {"peer history", &g.peer_history},
      {"peer risk", &g.peer_risk}};
  const int width = static_cast<int>(channels.size()) * (panel + kGap) + kGap;
  const int height = panel + kTitle + 2 * kGap;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"monospace\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const auto& values = *channels[c].second;
    const double peak = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
    const int x0 = kGap + static_cast<int>(c) * (panel + kGap);
    const int y0 = kGap + kTitle;
    os << "<text x=\"" << x0 << "\" y=\"" << kGap + 12 << "\">" << channels[c].first << "</text>\n";
    for (std::size_t k = 0; k < values.size(); ++k) {
      const GridCoord cell = g.placement.cells[k];
      const double t = peak > 0.0 ? values[k] / peak : 0.0;
      // Single-hue ramp from the background to a dark red.
      const int r = static_cast<int>(245 - t * (245 - 139));
      const int gb = static_cast<int>(245 - t * 245);
      const int x = x0 + cell.col * kCell;
      const int y = y0 + (side - 1 - cell.row) * kCell;
      char color[8];
      std::snprintf(color, sizeof(color), "#%02x%02x%02x", r, gb, gb);
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\"" << kCell
         << "\" fill=\"" << color << "\" stroke=\"#cccccc\"/>";
      os << "<text x=\"" << x + 6 << "\" y=\"" << y + 22 << "\" fill=\"" << (t > 0.6 ? "#ffffff" : "#333333")
         << "\">" << g.labels[k] << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace topic_grids
