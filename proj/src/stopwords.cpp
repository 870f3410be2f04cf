#include <algorithm>
#include <array>
#include <string_view>

#include "topic_grids/topic_model.hpp"

namespace topic_grids {

namespace {

// Common English function words of three or more letters. Sorted.
constexpr std::array<std::string_view, 150> kStopwords = {
    "about",   "above",   "after",   "again",    "against", "all",     "also",    "and",
    "any",     "are",     "aren",    "because",  "been",    "before",  "being",   "below",
    "between", "both",    "but",     "can",      "cannot",  "could",   "couldn",  "did",
    "didn",    "does",    "doesn",   "doing",    "don",     "down",    "during",  "each",
    "either",  "else",    "ever",    "every",    "few",     "for",     "from",    "further",
    "had",     "hadn",    "has",     "hasn",     "have",    "haven",   "having",  "her",
    "here",    "hers",    "herself", "him",      "himself", "his",     "how",     "however",
    "into",    "isn",     "its",     "itself",   "just",    "least",   "less",    "let",
    "like",    "many",    "may",     "might",    "mine",    "more",    "most",    "much",
    "must",    "mustn",   "myself",  "neither",  "never",   "nor",     "not",     "now",
    "off",     "once",    "one",     "only",     "onto",    "other",   "others",  "ought",
    "our",     "ours",    "ourselves", "out",    "over",    "own",     "per",     "same",
    "shall",   "shan",    "she",     "should",   "shouldn", "since",   "some",    "still",
    "such",    "than",    "that",    "the",      "their",   "theirs",  "them",    "themselves",
    "then",    "there",   "these",   "they",     "this",    "those",   "though",  "through",
    "thus",    "too",     "under",   "until",    "upon",    "very",    "was",     "wasn",
    "were",    "weren",   "what",    "when",     "where",   "whether", "which",   "while",
    "who",     "whom",    "whose",   "why",      "will",    "with",    "within",  "without",
    "won",     "would",   "wouldn",  "yet",      "you",     "your",
};

static_assert(std::is_sorted(kStopwords.begin(), kStopwords.end()));

}  // namespace

bool is_stopword(std::string_view token) {
  return std::binary_search(kStopwords.begin(), kStopwords.end(), token);
}

}  // namespace topic_grids
