#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "topic_grids/embedding.hpp"

namespace topic_grids {

// Sparse bag of words: (term id, count) pairs sorted by term id.
using TermCounts = std::vector<std::pair<int, int>>;

// Lowercase, split on every non-alphanumeric character, drop tokens shorter
// than three characters and stopwords.
std::vector<std::string> tokenize(std::string_view text);

bool is_stopword(std::string_view token);

struct Corpus {
  std::vector<std::string> vocabulary;  // sorted
  std::vector<TermCounts> documents;
  std::vector<std::string> doc_ids;

  int term_id(std::string_view term) const;  // -1 if absent
  std::uint64_t total_tokens() const;
};

// doc_ids default to "d<index>". Throws DomainError if no token survives.
Corpus build_corpus(const std::vector<std::string>& documents,
                    std::vector<std::string> doc_ids = {});

// Tokenizes text and keeps only terms present in `vocabulary` (sorted).
TermCounts to_term_counts(std::string_view text, const std::vector<std::string>& vocabulary);

struct LdaConfig {
  int topics = 64;
  double alpha = -1.0;  // negative: 50 / topics
  double beta = 0.01;
  int iterations = 500;
  int averaged = 100;  // final sweeps averaged into the estimates
  std::uint64_t seed = 0;

  double effective_alpha() const { return alpha > 0.0 ? alpha : 50.0 / topics; }
};

struct TopicModel {
  int K = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> vocabulary;
  std::vector<std::vector<double>> topic_word;  // K x V
  std::vector<std::vector<double>> doc_topic;   // one K-vector per fitted document

  int term_id(std::string_view term) const;
};

// Collapsed Gibbs sampling; deterministic given cfg.seed.
TopicModel fit_lda(const Corpus& corpus, const LdaConfig& cfg);

// Fold-in inference with topic_word held fixed: the share of the document's
// tokens assigned to each topic, averaged over post-burn-in sweeps. The
// Dirichlet prior enters the sampler but not the estimate, so short
// documents are not flattened towards uniform. The Gibbs stream is seeded
// from the model seed and `doc_key`, so equal keys give equal vectors.
// Throws DomainError when the document has no in-vocabulary token.
std::vector<double> doc_topic_relevance(const TopicModel& model, const TermCounts& doc,
                                        std::string_view doc_key);

struct TopicLabel {
  std::string label;
  std::optional<std::string> anonymized;
};

// First three characters of the topic's most probable word (ties broken
// lexicographically), optionally with a hashed stand-in.
TopicLabel topic_label(const TopicModel& model, int k, bool anonymize = false);

// The three-letter hashed stand-in for `word`.
std::string anonymize_word(std::string_view word);

// Top `count` (word, probability) pairs of topic k, probability descending.
std::vector<std::pair<std::string, double>> top_words(const TopicModel& model, int k,
                                                      std::size_t count);

DistanceMatrix topic_distance_matrix(const TopicModel& model,
                                     DistanceMetric metric = DistanceMetric::kCosine);

nlohmann::json to_json(const TopicModel& model);
TopicModel topic_model_from_json(const nlohmann::json& j);

// One JSON object per line: {"doc_id": ..., "counts": {term: count}}.
std::string corpus_to_jsonl(const Corpus& corpus);

}  // namespace topic_grids
