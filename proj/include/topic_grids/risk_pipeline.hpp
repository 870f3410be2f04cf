#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "topic_grids/embedding.hpp"
#include "topic_grids/sd_layout.hpp"
#include "topic_grids/topic_model.hpp"

namespace topic_grids {

// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

// Accepts "YYYY-MM-DDTHH:MM:SSZ" (a trailing "Z" or "+00:00" is required).
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

struct LogEntry {
  Timestamp ts = 0;
  std::string user;
  std::string action;
  std::string path;
  std::string meta;
  std::optional<std::string> group;

  bool operator==(const LogEntry&) const = default;
};

nlohmann::json to_json(const LogEntry& entry);
LogEntry log_entry_from_json(const nlohmann::json& j);

struct ParseFailure {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct ParsedLog {
  std::vector<LogEntry> entries;
  std::vector<ParseFailure> failures;
};

// Blank lines are skipped. Throws IngestError when there are no entries or
// when malformed lines exceed `max_malformed_fraction` of non-blank lines.
ParsedLog parse_log(std::string_view jsonl, double max_malformed_fraction = 0.10);

// Path and meta joined by a space; either may be empty.
std::string content_document(const LogEntry& entry);

// Half-open [start, end).
struct TimeWindow {
  Timestamp start = 0;
  Timestamp end = 0;

  bool contains(Timestamp ts) const { return ts >= start && ts < end; }
  bool empty() const { return end <= start; }
  bool operator==(const TimeWindow&) const = default;
};

enum class Scope { kCurrent, kSelfHistory, kPeerHistory };

Scope parse_scope(std::string_view name);
std::string to_string(Scope scope);

struct ActivityVector {
  std::string user;
  Scope scope = Scope::kCurrent;
  TimeWindow window;
  std::vector<double> mass;  // one nonnegative entry per topic
};

// Immutable view over a log and a fitted model: per-entry topic relevance
// (cached per distinct content document), peer groups, and the benchmark
// period. Safe to share across threads once built.
class ActivityIndex {
 public:
  ActivityIndex(std::vector<LogEntry> entries, std::shared_ptr<const TopicModel> model,
                TimeWindow period);

  const std::vector<LogEntry>& entries() const { return entries_; }
  const TopicModel& model() const { return *model_; }
  const TimeWindow& period() const { return period_; }
  int topics() const { return model_->K; }

  // Empty when the entry's content has no in-vocabulary token.
  const std::vector<double>& relevance(std::size_t entry) const;
  // Most relevant topic of an entry, or -1 when it has no relevance.
  int dominant_topic(std::size_t entry) const;

  std::vector<std::string> users() const;
  bool has_user(std::string_view user) const;
  // Users sharing the user's group (user excluded); every other user when
  // the user has no group.
  std::vector<std::string> peers_of(std::string_view user) const;

  // Indices of entries that count toward (user, scope, window).
  std::vector<std::size_t> select(std::string_view user, Scope scope, const TimeWindow& window) const;

 private:
  std::vector<LogEntry> entries_;
  std::shared_ptr<const TopicModel> model_;
  TimeWindow period_;
  std::vector<std::size_t> doc_of_entry_;
  std::vector<std::vector<double>> doc_relevance_;
  std::map<std::string, std::optional<std::string>, std::less<>> user_group_;
};

// Scope rules: CURRENT is the user's entries inside the window;
// SELF_HISTORY the user's entries in the benchmark period before the window
// start; PEER_HISTORY the peers' entries in the benchmark period before the
// window end.
ActivityVector activity_vector(const ActivityIndex& index, std::string_view user, Scope scope,
                               const TimeWindow& window);

// Mass normalized to a distribution with additive smoothing per component.
std::vector<double> smoothed_distribution(std::span<const double> mass, double epsilon = 1e-6);

// Per-topic comparison of current activity against a baseline.
class RiskComparison {
 public:
  virtual ~RiskComparison() = default;
  virtual std::string name() const = 0;
  virtual std::vector<double> compare(std::span<const double> current,
                                      std::span<const double> baseline) const = 0;
};

// r_k = max(0, c_k - b_k) on smoothed distributions; sums to the total
// variation distance.
class OneSidedTotalVariation final : public RiskComparison {
 public:
  explicit OneSidedTotalVariation(double epsilon = 1e-6) : epsilon_(epsilon) {}
  std::string name() const override { return "one_sided_total_variation"; }
  std::vector<double> compare(std::span<const double> current,
                              std::span<const double> baseline) const override;

 private:
  double epsilon_;
};

std::vector<double> risk_vector(const ActivityVector& current, const ActivityVector& baseline,
                                const RiskComparison& comparison = OneSidedTotalVariation());

struct TopicGridSet {
  std::string user;
  TimeWindow window;
  Placement placement;
  std::vector<std::string> labels;
  std::vector<double> current;
  std::vector<double> self_history;
  std::vector<double> self_risk;
  std::vector<double> peer_history;
  std::vector<double> peer_risk;

  double total_self_risk() const;
  double total_peer_risk() const;
};

// A user with no current activity gets zero risk vectors.
TopicGridSet assemble_topic_grids(const ActivityIndex& index, const Placement& placement,
                                  const std::vector<std::string>& labels, std::string_view user,
                                  const TimeWindow& window,
                                  const RiskComparison& comparison = OneSidedTotalVariation());

// Topic distances -> 2-D embedding -> split-diffuse. K must be a power of 4.
Placement build_topic_placement(const TopicModel& model, DistanceMetric metric,
                                const EmbeddingConfig& embedding);

nlohmann::json to_json(const TopicGridSet& grids);

// Five heatmap panels side by side, one per channel.
std::string render_svg(const TopicGridSet& grids);

}  // namespace topic_grids
