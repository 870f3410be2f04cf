#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "topic_grids/risk_pipeline.hpp"

namespace topic_grids {

// Synthetic access log: groups of users working on disjoint sets of
// vocabulary "themes", with one user who, during the final day, touches
// only a theme that belongs to another group.
struct SyntheticLogConfig {
  std::uint64_t seed = 2016;
  int groups = 4;
  int users_per_group = 4;
  int themes_per_group = 16;
  int words_per_theme = 8;
  int preferred_themes = 8;
  int days = 28;
  int min_daily_accesses = 6;
  int max_daily_accesses = 10;
  Timestamp start = 1451606400;  // 2016-01-01T00:00:00Z
  std::string anomalous_user = "u1";
  int planted_theme = 37;  // must belong to a group other than the anomalous user's
  int planted_accesses = 12;
};

struct SyntheticLog {
  std::vector<LogEntry> entries;  // sorted by timestamp
  std::vector<std::vector<std::string>> themes;
  std::string anomalous_user;
  int planted_theme = 0;
  TimeWindow period;
  TimeWindow final_day;
};

SyntheticLog make_synthetic_log(const SyntheticLogConfig& cfg = {});

std::string to_jsonl(const std::vector<LogEntry>& entries);

// Topic whose word distribution places the most mass on the theme's words.
int topic_for_words(const TopicModel& model, const std::vector<std::string>& words);

}  // namespace topic_grids
