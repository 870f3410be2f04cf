#include "topic_grids/topic_model.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "topic_grids/error.hpp"
#include "topic_grids/random.hpp"

namespace topic_grids {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 3 && !is_stopword(current)) tokens.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) != 0) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

namespace {

int find_term(const std::vector<std::string>& vocabulary, std::string_view term) {
  const auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), term);
  if (it == vocabulary.end() || *it != term) return -1;
  return static_cast<int>(it - vocabulary.begin());
}

void normalize(std::vector<double>& v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= total;
}

}  // namespace

int Corpus::term_id(std::string_view term) const { return find_term(vocabulary, term); }

int TopicModel::term_id(std::string_view term) const { return find_term(vocabulary, term); }

std::uint64_t Corpus::total_tokens() const {
  std::uint64_t total = 0;
  for (const auto& doc : documents) {
    for (const auto& [term, count] : doc) total += static_cast<std::uint64_t>(count);
  }
  return total;
}

Corpus build_corpus(const std::vector<std::string>& documents, std::vector<std::string> doc_ids) {
  if (!doc_ids.empty() && doc_ids.size() != documents.size()) {
    throw DomainError("doc_ids must match the number of documents");
  }
  std::vector<std::map<std::string, int>> bags(documents.size());
  std::map<std::string, int> vocab;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (auto& token : tokenize(documents[d])) {
      ++bags[d][token];
      vocab.emplace(std::move(token), 0);
    }
  }
  if (vocab.empty()) throw DomainError("corpus is empty after tokenization");

  Corpus corpus;
  corpus.vocabulary.reserve(vocab.size());
  for (auto& [term, id] : vocab) {
    id = static_cast<int>(corpus.vocabulary.size());
    corpus.vocabulary.push_back(term);
  }
  corpus.documents.resize(documents.size());
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (const auto& [term, count] : bags[d]) corpus.documents[d].emplace_back(vocab[term], count);
  }
  if (doc_ids.empty()) {
    doc_ids.reserve(documents.size());
    for (std::size_t d = 0; d < documents.size(); ++d) doc_ids.push_back("d" + std::to_string(d));
  }
  corpus.doc_ids = std::move(doc_ids);
  return corpus;
}

TermCounts to_term_counts(std::string_view text, const std::vector<std::string>& vocabulary) {
  std::map<int, int> counts;
  for (const auto& token : tokenize(text)) {
    const int id = find_term(vocabulary, token);
    if (id >= 0) ++counts[id];
  }
  return {counts.begin(), counts.end()};
}

TopicModel fit_lda(const Corpus& corpus, const LdaConfig& cfg) {
  if (cfg.topics < 1) throw DomainError("LDA needs K >= 1");
  if (cfg.iterations < 1) throw DomainError("LDA needs at least one iteration");
  if (!(cfg.beta > 0.0)) throw DomainError("LDA beta must be positive");
  const auto total_tokens = corpus.total_tokens();
  if (static_cast<std::uint64_t>(cfg.topics) > total_tokens) {
    throw DomainError("K = " + std::to_string(cfg.topics) + " exceeds the " +
                      std::to_string(total_tokens) + " tokens in the corpus");
  }

  const int K = cfg.topics;
  const int V = static_cast<int>(corpus.vocabulary.size());
  const std::size_t D = corpus.documents.size();
  const double alpha = cfg.effective_alpha();
  const double beta = cfg.beta;
  const double v_beta = V * beta;

  std::vector<int> words;
  std::vector<std::size_t> doc_start(D + 1, 0);
  for (std::size_t d = 0; d < D; ++d) {
    doc_start[d] = words.size();
    for (const auto& [term, count] : corpus.documents[d]) words.insert(words.end(), count, term);
  }
  doc_start[D] = words.size();

  Rng rng(cfg.seed);
  std::vector<int> z(words.size());
  std::vector<int> doc_topic(D * K, 0);
  std::vector<int> topic_word(static_cast<std::size_t>(K) * V, 0);
  std::vector<int> topic_total(K, 0);
  for (std::size_t d = 0; d < D; ++d) {
    for (std::size_t t = doc_start[d]; t < doc_start[d + 1]; ++t) {
      const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
      z[t] = k;
      ++doc_topic[d * K + k];
      ++topic_word[static_cast<std::size_t>(k) * V + words[t]];
      ++topic_total[k];
    }
  }

  TopicModel model;
  model.K = K;
  model.alpha = alpha;
  model.beta = beta;
  model.seed = cfg.seed;
  model.vocabulary = corpus.vocabulary;
  model.topic_word.assign(K, std::vector<double>(V, 0.0));
  model.doc_topic.assign(D, std::vector<double>(K, 0.0));

  const int averaged = std::clamp(cfg.averaged, 1, cfg.iterations);
  std::vector<double> weights(K);
  for (int it = 0; it < cfg.iterations; ++it) {
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t t = doc_start[d]; t < doc_start[d + 1]; ++t) {
        const int w = words[t];
        const int old = z[t];
        --doc_topic[d * K + old];
        --topic_word[static_cast<std::size_t>(old) * V + w];
        --topic_total[old];

        double total = 0.0;
        for (int k = 0; k < K; ++k) {
          total += (doc_topic[d * K + k] + alpha) *
                   (topic_word[static_cast<std::size_t>(k) * V + w] + beta) /
                   (topic_total[k] + v_beta);
          weights[k] = total;
        }
        const double u = rng.uniform() * total;
        int k = static_cast<int>(std::upper_bound(weights.begin(), weights.end(), u) - weights.begin());
        k = std::min(k, K - 1);

        z[t] = k;
        ++doc_topic[d * K + k];
        ++topic_word[static_cast<std::size_t>(k) * V + w];
        ++topic_total[k];
      }
    }
    if (it >= cfg.iterations - averaged) {
      for (int k = 0; k < K; ++k) {
        const double denom = topic_total[k] + v_beta;
        for (int w = 0; w < V; ++w) {
          model.topic_word[k][w] += (topic_word[static_cast<std::size_t>(k) * V + w] + beta) / denom;
        }
      }
      for (std::size_t d = 0; d < D; ++d) {
        const double len = static_cast<double>(doc_start[d + 1] - doc_start[d]);
        for (int k = 0; k < K; ++k) {
          model.doc_topic[d][k] += (doc_topic[d * K + k] + alpha) / (len + K * alpha);
        }
      }
    }
  }
  for (auto& row : model.topic_word) normalize(row);
  for (auto& row : model.doc_topic) normalize(row);
  return model;
}

std::vector<double> doc_topic_relevance(const TopicModel& model, const TermCounts& doc,
                                        std::string_view doc_key) {
  constexpr int kSweeps = 60;
  constexpr int kBurnIn = 20;

  std::vector<int> words;
  const int V = static_cast<int>(model.vocabulary.size());
  for (const auto& [term, count] : doc) {
    if (term >= 0 && term < V && count > 0) words.insert(words.end(), count, term);
  }
  if (words.empty()) throw DomainError("document has no in-vocabulary tokens");
  const int K = model.K;
  if (K == 1) return {1.0};

  Rng rng(derive_seed(model.seed, fnv1a64(doc_key)));
  std::vector<int> z(words.size());
  std::vector<int> counts(K, 0);
  for (std::size_t t = 0; t < words.size(); ++t) {
    z[t] = static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
    ++counts[z[t]];
  }
  std::vector<double> relevance(K, 0.0);
  std::vector<double> weights(K);
  const double len = static_cast<double>(words.size());
  for (int sweep = 0; sweep < kSweeps; ++sweep) {
    for (std::size_t t = 0; t < words.size(); ++t) {
      --counts[z[t]];
      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        total += (counts[k] + model.alpha) * model.topic_word[k][words[t]];
        weights[k] = total;
      }
      const double u = rng.uniform() * total;
      int k = static_cast<int>(std::upper_bound(weights.begin(), weights.end(), u) - weights.begin());
      z[t] = std::min(k, K - 1);
      ++counts[z[t]];
    }
    if (sweep >= kBurnIn) {
      for (int k = 0; k < K; ++k) relevance[k] += counts[k] / len;
    }
  }
  normalize(relevance);
  return relevance;
}

std::string anonymize_word(std::string_view word) {
  std::uint64_t h = fnv1a64(word);
  std::string out;
  for (int i = 0; i < 3; ++i) {
    out.push_back(static_cast<char>('a' + h % 26));
    h /= 26;
  }
  return out;
}

TopicLabel topic_label(const TopicModel& model, int k, bool anonymize) {
  if (k < 0 || k >= model.K) throw DomainError("topic index out of range");
  const auto& row = model.topic_word[k];
  // max_element keeps the first maximum; the vocabulary is sorted.
  const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  const std::string& word = model.vocabulary[best];
  TopicLabel label{word.substr(0, 3), std::nullopt};
  if (anonymize) label.anonymized = anonymize_word(word);
  return label;
}

std::vector<std::pair<std::string, double>> top_words(const TopicModel& model, int k,
                                                      std::size_t count) {
  if (k < 0 || k >= model.K) throw DomainError("topic index out of range");
  const auto& row = model.topic_word[k];
  std::vector<std::size_t> order(row.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  count = std::min(count, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    [&](std::size_t a, std::size_t b) { return row[a] > row[b] || (row[a] == row[b] && a < b); });
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < count; ++i) out.emplace_back(model.vocabulary[order[i]], row[order[i]]);
  return out;
}

DistanceMatrix topic_distance_matrix(const TopicModel& model, DistanceMetric metric) {
  return pairwise_distances(model.topic_word, metric);
}

nlohmann::json to_json(const TopicModel& model) {
  return {{"K", model.K},
          {"alpha", model.alpha},
          {"beta", model.beta},
          {"seed", model.seed},
          {"vocabulary", model.vocabulary},
          {"topic_word", model.topic_word}};
}

TopicModel topic_model_from_json(const nlohmann::json& j) {
  TopicModel model;
  model.K = j.at("K").get<int>();
  model.alpha = j.at("alpha").get<double>();
  model.beta = j.at("beta").get<double>();
  model.seed = j.at("seed").get<std::uint64_t>();
  model.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  model.topic_word = j.at("topic_word").get<std::vector<std::vector<double>>>();
  if (model.K < 1 || model.topic_word.size() != static_cast<std::size_t>(model.K)) {
    throw DomainError("model JSON: topic_word does not have K rows");
  }
  if (!std::is_sorted(model.vocabulary.begin(), model.vocabulary.end())) {
    throw DomainError("model JSON: vocabulary must be sorted");
  }
  for (const auto& row : model.topic_word) {
    if (row.size() != model.vocabulary.size()) {
      throw DomainError("model JSON: topic_word row length differs from the vocabulary");
    }
  }
  return model;
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::ostringstream os;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [term, count] : corpus.documents[d]) counts[corpus.vocabulary[term]] = count;
    os << nlohmann::json{{"doc_id", corpus.doc_ids[d]}, {"counts", counts}}.dump() << '\n';
  }
  return os.str();
}

}  // namespace topic_grids
