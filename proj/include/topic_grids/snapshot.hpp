#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "topic_grids/embedding.hpp"
#include "topic_grids/risk_pipeline.hpp"
#include "topic_grids/topic_model.hpp"

namespace topic_grids {

// Failure in one pipeline stage: ingest, model, placement or grids.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  LdaConfig lda;
  DistanceMetric metric = DistanceMetric::kCosine;
  EmbeddingConfig embedding;
  std::optional<TimeWindow> period;  // default: first entry to one second after the last
  std::optional<TimeWindow> window;  // default: trailing day of the period
  bool anonymize_labels = false;
  double max_malformed_fraction = 0.10;
};

// Fitted model, placement, and per-user grids; immutable once built.
struct Snapshot {
  std::string version;
  std::shared_ptr<const TopicModel> model;
  Placement placement;
  std::vector<std::string> labels;
  std::vector<std::string> plain_labels;
  std::shared_ptr<const ActivityIndex> index;
  TimeWindow window;
  std::map<std::string, TopicGridSet> grids;
  nlohmann::json metadata;
};

Snapshot run_pipeline(std::string_view log_jsonl, const PipelineConfig& cfg);

// Writes snapshot.json, model.json, placement.csv, entries.jsonl,
// corpus.jsonl, grids.json and svg/<user>.svg under dir.
void write_snapshot(const Snapshot& snapshot, const std::filesystem::path& dir);
Snapshot load_snapshot(const std::filesystem::path& dir);

TopicGridSet topic_grid_set_from_json(const nlohmann::json& j);

// "START/END" with both ends as YYYY-MM-DDTHH:MM:SSZ.
TimeWindow parse_window(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace topic_grids
