#include "topic_grids/snapshot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "topic_grids/csv_io.hpp"
#include "topic_grids/error.hpp"
#include "topic_grids/fixture.hpp"
#include "topic_grids/random.hpp"

namespace topic_grids {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

TimeWindow parse_window(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) throw DomainError("window must be START/END");
  TimeWindow w{parse_timestamp(text.substr(0, slash)), parse_timestamp(text.substr(slash + 1))};
  if (w.empty()) throw DomainError("window end must be after its start");
  return w;
}

namespace {

nlohmann::json window_json(const TimeWindow& w) {
  return {{"start", format_timestamp(w.start)}, {"end", format_timestamp(w.end)}};
}

TimeWindow window_from_json(const nlohmann::json& j) {
  return {parse_timestamp(j.at("start").get<std::string>()), parse_timestamp(j.at("end").get<std::string>())};
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string safe_file_name(const std::string& user) {
  std::string out;
  for (char c : user) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out;
}

std::vector<std::string> make_labels(const TopicModel& model, bool anonymize) {
  std::vector<std::string> out;
  for (int k = 0; k < model.K; ++k) {
    auto label = topic_label(model, k, anonymize);
    out.push_back(anonymize ? *label.anonymized : label.label);
  }
  return out;
}

std::string version_of(const nlohmann::json& model_json, const Placement& placement, const std::string& entries) {
  return hex64(derive_seed(fnv1a64(model_json.dump()), fnv1a64(write_placement_csv(placement)), fnv1a64(entries)));
}

nlohmann::json config_json(const PipelineConfig& cfg) {
  return {{"topics", cfg.lda.topics},
          {"alpha", cfg.lda.effective_alpha()},
          {"beta", cfg.lda.beta},
          {"iterations", cfg.lda.iterations},
          {"averaged", cfg.lda.averaged},
          {"seed", cfg.lda.seed},
          {"metric", to_string(cfg.metric)},
          {"embedding", cfg.embedding.method == EmbeddingMethod::kMds ? "mds" : "tsne"},
          {"embedding_seed", cfg.embedding.seed},
          {"anonymize_labels", cfg.anonymize_labels}};
}

}  // namespace

Snapshot run_pipeline(std::string_view log_jsonl, const PipelineConfig& cfg) {
  ParsedLog parsed = stage("ingest", [&] { return parse_log(log_jsonl, cfg.max_malformed_fraction); });
  std::stable_sort(parsed.entries.begin(), parsed.entries.end(),
                   [](const LogEntry& a, const LogEntry& b) { return a.ts < b.ts; });

  const TimeWindow period = cfg.period.value_or(TimeWindow{parsed.entries.front().ts, parsed.entries.back().ts + 1});
  const TimeWindow window = cfg.window.value_or(TimeWindow{std::max(period.start, period.end - 86400), period.end});
  if (period.empty() || window.empty()) throw PipelineError("ingest", "benchmark period or window is empty");

  auto model = stage("model", [&] {
    std::vector<std::string> docs;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < parsed.entries.size(); ++i) {
      if (!period.contains(parsed.entries[i].ts)) continue;
      docs.push_back(content_document(parsed.entries[i]));
      ids.push_back("e" + std::to_string(i));
    }
    const Corpus corpus = build_corpus(docs, ids);
    return std::make_shared<const TopicModel>(fit_lda(corpus, cfg.lda));
  });

  Snapshot snap;
  snap.model = model;
  snap.window = window;
  snap.placement = stage("placement", [&] { return build_topic_placement(*model, cfg.metric, cfg.embedding); });
  snap.plain_labels = make_labels(*model, false);
  snap.labels = cfg.anonymize_labels ? make_labels(*model, true) : snap.plain_labels;

  stage("grids", [&] {
    snap.index = std::make_shared<const ActivityIndex>(std::move(parsed.entries), model, period);
    for (const auto& user : snap.index->users()) {
      snap.grids.emplace(user, assemble_topic_grids(*snap.index, snap.placement, snap.labels, user, window));
    }
    return 0;
  });

  const auto model_json = to_json(*model);
  snap.version = version_of(model_json, snap.placement, to_jsonl(snap.index->entries()));
  snap.metadata = {{"version", snap.version},
                   {"K", model->K},
                   {"h", snap.placement.h},
                   {"period", window_json(period)},
                   {"window", window_json(window)},
                   {"users", snap.index->users()},
                   {"entries", snap.index->entries().size()},
                   {"malformed_lines", parsed.failures.size()},
                   {"labels", snap.labels},
                   {"config", config_json(cfg)}};
  return snap;
}

void write_snapshot(const Snapshot& snapshot, const fs::path& dir) {
  fs::create_directories(dir / "svg");
  write_file(dir / "snapshot.json", snapshot.metadata.dump(2) + "\n");
  write_file(dir / "model.json", to_json(*snapshot.model).dump() + "\n");
  write_file(dir / "placement.csv", write_placement_csv(snapshot.placement));
  write_file(dir / "entries.jsonl", to_jsonl(snapshot.index->entries()));

  std::vector<std::string> docs;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < snapshot.index->entries().size(); ++i) {
    docs.push_back(content_document(snapshot.index->entries()[i]));
    ids.push_back("e" + std::to_string(i));
  }
  Corpus cached;
  cached.vocabulary = snapshot.model->vocabulary;
  cached.doc_ids = ids;
  for (const auto& d : docs) cached.documents.push_back(to_term_counts(d, cached.vocabulary));
  write_file(dir / "corpus.jsonl", corpus_to_jsonl(cached));

  nlohmann::json grids = nlohmann::json::object();
  for (const auto& [user, g] : snapshot.grids) {
    grids[user] = to_json(g);
    write_file(dir / "svg" / (safe_file_name(user) + ".svg"), render_svg(g));
  }
  write_file(dir / "grids.json", grids.dump() + "\n");
}

TopicGridSet topic_grid_set_from_json(const nlohmann::json& j) {
  TopicGridSet g;
  g.user = j.at("user").get<std::string>();
  g.window = window_from_json(j.at("window"));
  g.placement.h = j.at("h").get<int>();
  const auto& cells = j.at("cells");
  const std::size_t K = cells.size();
  g.placement.cells.resize(K);
  g.placement.paths.resize(K);
  g.labels.resize(K);
  for (auto* v : {&g.current, &g.self_history, &g.self_risk, &g.peer_history, &g.peer_risk}) v->resize(K);
  for (const auto& c : cells) {
    const auto k = c.at("k").get<std::size_t>();
    if (k >= K) throw DomainError("grid cell index out of range");
    g.placement.cells[k] = {c.at("col").get<int>(), c.at("row").get<int>()};
    g.labels[k] = c.at("label").get<std::string>();
    g.current[k] = c.at("current").get<double>();
    g.self_history[k] = c.at("self_history").get<double>();
    g.self_risk[k] = c.at("self_risk").get<double>();
    g.peer_history[k] = c.at("peer_history").get<double>();
    g.peer_risk[k] = c.at("peer_risk").get<double>();
  }
  return g;
}

Snapshot load_snapshot(const fs::path& dir) {
  Snapshot snap;
  snap.metadata = nlohmann::json::parse(read_file(dir / "snapshot.json"));
  snap.version = snap.metadata.at("version").get<std::string>();
  snap.window = window_from_json(snap.metadata.at("window"));
  snap.labels = snap.metadata.at("labels").get<std::vector<std::string>>();
  auto model = std::make_shared<const TopicModel>(
      topic_model_from_json(nlohmann::json::parse(read_file(dir / "model.json"))));
  snap.model = model;
  snap.plain_labels = make_labels(*model, false);
  snap.placement = read_placement_csv(read_file(dir / "placement.csv"));
  if (snap.placement.size() != static_cast<std::size_t>(model->K) || snap.labels.size() != snap.placement.size()) {
    throw DomainError("snapshot placement, labels and model disagree on the topic count");
  }

  std::vector<LogEntry> entries;
  std::istringstream lines(read_file(dir / "entries.jsonl"));
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty()) entries.push_back(log_entry_from_json(nlohmann::json::parse(line)));
  }
  snap.index = std::make_shared<const ActivityIndex>(std::move(entries), model,
                                                     window_from_json(snap.metadata.at("period")));

  const auto grids = nlohmann::json::parse(read_file(dir / "grids.json"));
  for (const auto& [user, g] : grids.items()) {
    auto set = topic_grid_set_from_json(g);
    set.placement = snap.placement;
    snap.grids.emplace(user, std::move(set));
  }
  return snap;
}

}  // namespace topic_grids
