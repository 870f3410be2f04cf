#include "topic_grids/fixture.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "topic_grids/error.hpp"
#include "topic_grids/random.hpp"

namespace topic_grids {

namespace {

constexpr std::string_view kConsonants = "bcdfghklmnprstvz";
constexpr std::string_view kVowels = "aeiou";
constexpr std::string_view kGroupNames[] = {"finance", "engineering", "legal", "sales",
                                            "research", "support", "marketing", "operations"};
constexpr std::string_view kExtensions[] = {"xlsx", "docx", "pdf", "csv", "txt", "pptx"};

std::string pseudo_word(Rng& rng) {
  std::string w;
  const int syllables = 2 + static_cast<int>(rng.below(2));
  for (int s = 0; s < syllables; ++s) {
    w.push_back(kConsonants[rng.below(kConsonants.size())]);
    w.push_back(kVowels[rng.below(kVowels.size())]);
  }
  w.push_back(kConsonants[rng.below(kConsonants.size())]);
  return w;
}

std::string pick(Rng& rng, const std::vector<std::string>& words) {
  return words[rng.below(words.size())];
}

LogEntry make_access(Rng& rng, Timestamp ts, const std::string& user, const std::string& group,
                     const std::string& directory, const std::vector<std::string>& theme) {
  LogEntry e;
  e.ts = ts;
  e.user = user;
  const double a = rng.uniform();
  e.action = a < 0.70 ? "read" : a < 0.90 ? "write" : a < 0.95 ? "share" : "delete";
  e.path = "/" + directory + "/" + pick(rng, theme) + "/" + pick(rng, theme) + "_" + pick(rng, theme) +
           "." + std::string(kExtensions[rng.below(std::size(kExtensions))]);
  if (rng.uniform() < 0.5) e.meta = pick(rng, theme) + " " + pick(rng, theme);
  e.group = group;
  return e;
}

}  // namespace

SyntheticLog make_synthetic_log(const SyntheticLogConfig& cfg) {
  if (cfg.groups < 1 || cfg.groups > static_cast<int>(std::size(kGroupNames))) {
    throw DomainError("synthetic log supports 1 to 8 groups");
  }
  if (cfg.preferred_themes > cfg.themes_per_group || cfg.min_daily_accesses > cfg.max_daily_accesses ||
      cfg.days < 2) {
    throw DomainError("inconsistent synthetic log configuration");
  }
  const int theme_count = cfg.groups * cfg.themes_per_group;
  if (cfg.planted_theme < 0 || cfg.planted_theme >= theme_count) {
    throw DomainError("planted theme out of range");
  }
  Rng rng(cfg.seed);

  SyntheticLog log;
  log.anomalous_user = cfg.anomalous_user;
  log.planted_theme = cfg.planted_theme;
  log.period = {cfg.start, cfg.start + static_cast<Timestamp>(cfg.days) * 86400};
  log.final_day = {log.period.end - 86400, log.period.end};

  std::set<std::string> used(std::begin(kGroupNames), std::end(kGroupNames));
  used.insert({"read", "write", "share", "delete"});
  for (auto ext : kExtensions) used.emplace(ext);
  log.themes.resize(static_cast<std::size_t>(theme_count));
  for (auto& theme : log.themes) {
    while (static_cast<int>(theme.size()) < cfg.words_per_theme) {
      std::string w = pseudo_word(rng);
      if (is_stopword(w) || !used.insert(w).second) continue;
      theme.push_back(std::move(w));
    }
  }

  struct User {
    std::string name;
    int group = 0;
    std::vector<int> preferred;
  };
  std::vector<User> users;
  for (int g = 0; g < cfg.groups; ++g) {
    for (int u = 0; u < cfg.users_per_group; ++u) {
      User user{"u" + std::to_string(users.size() + 1), g, {}};
      std::vector<int> pool(static_cast<std::size_t>(cfg.themes_per_group));
      for (int t = 0; t < cfg.themes_per_group; ++t) pool[t] = g * cfg.themes_per_group + t;
      for (int p = 0; p < cfg.preferred_themes; ++p) {
        const auto j = static_cast<std::size_t>(p) + rng.below(pool.size() - static_cast<std::size_t>(p));
        std::swap(pool[static_cast<std::size_t>(p)], pool[j]);
        user.preferred.push_back(pool[static_cast<std::size_t>(p)]);
      }
      users.push_back(std::move(user));
    }
  }
  const auto anomalous = std::find_if(users.begin(), users.end(),
                                      [&](const User& u) { return u.name == cfg.anomalous_user; });
  if (anomalous == users.end()) throw DomainError("anomalous user is not among the generated users");
  const int planted_group = cfg.planted_theme / cfg.themes_per_group;
  if (planted_group == anomalous->group) {
    throw DomainError("planted theme must come from another group");
  }

  for (int day = 0; day < cfg.days; ++day) {
    const Timestamp day_start = cfg.start + static_cast<Timestamp>(day) * 86400;
    for (const auto& user : users) {
      const std::string group(kGroupNames[user.group]);
      const bool planted = day == cfg.days - 1 && user.name == cfg.anomalous_user;
      const int count = planted ? cfg.planted_accesses
                                : cfg.min_daily_accesses +
                                      static_cast<int>(rng.below(static_cast<std::uint64_t>(
                                          cfg.max_daily_accesses - cfg.min_daily_accesses + 1)));
      for (int a = 0; a < count; ++a) {
        const Timestamp ts = day_start + 8 * 3600 + static_cast<Timestamp>(rng.below(10 * 3600));
        if (planted) {
          log.entries.push_back(make_access(rng, ts, user.name, group, std::string(kGroupNames[planted_group]),
                                            log.themes[static_cast<std::size_t>(cfg.planted_theme)]));
          continue;
        }
        const int theme = rng.uniform() < 0.85
                              ? user.preferred[rng.below(user.preferred.size())]
                              : user.group * cfg.themes_per_group +
                                    static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.themes_per_group)));
        log.entries.push_back(make_access(rng, ts, user.name, group, group, log.themes[static_cast<std::size_t>(theme)]));
      }
    }
  }
  std::stable_sort(log.entries.begin(), log.entries.end(),
                   [](const LogEntry& a, const LogEntry& b) { return a.ts < b.ts; });
  return log;
}

std::string to_jsonl(const std::vector<LogEntry>& entries) {
  std::string out;
  for (const auto& e : entries) out += to_json(e).dump() + "\n";
  return out;
}

int topic_for_words(const TopicModel& model, const std::vector<std::string>& words) {
  int best = -1;
  double best_mass = -1.0;
  for (int k = 0; k < model.K; ++k) {
    double mass = 0.0;
    for (const auto& w : words) {
      const int id = model.term_id(w);
      if (id >= 0) mass += model.topic_word[k][static_cast<std::size_t>(id)];
    }
    if (mass > best_mass) {
      best_mass = mass;
      best = k;
    }
  }
  return best;
}

}  // namespace topic_grids
