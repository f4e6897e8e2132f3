#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tweetpol/embeddings.hpp"
#include "tweetpol/lexicon.hpp"
#include "tweetpol/preprocess.hpp"

namespace tweetpol {

inline constexpr std::size_t kTopPolarities = 9;
inline constexpr std::size_t kBowWords = 5;
inline constexpr double kDefaultNearThreshold = 0.5;

// Words that open a polarity-inverting scope.
inline const WordSet& default_negators() {
  static const WordSet words{"no", "ni", "nunca", "jamás", "tampoco", "sin", "nada", "nadie"};
  return words;
}

// Spanish function words. Polarity-relevant ones ("no", "pero", "aunque",
// "ni", "sin", "muy", "más", "nada", "nunca", ...) are deliberately absent.
inline const WordSet& default_stopwords() {
  static const WordSet words{
      "@user", "rt",    "a",     "al",    "algo",  "algunas", "algunos", "ante",   "antes",
      "como",  "con",   "contra", "cual", "cuando", "de",     "del",     "desde",  "donde",
      "durante", "e",   "el",    "él",    "ella",  "ellas",   "ellos",   "en",     "entre",
      "era",   "es",    "esa",   "esas",  "ese",   "eso",     "esos",    "esta",   "está",
      "estaba", "estas", "este", "esto",  "estos", "estoy",   "fue",     "ha",     "hay",
      "la",    "las",   "le",    "les",   "lo",    "los",     "me",      "mi",     "mis",
      "nos",   "o",     "os",    "para",  "por",   "que",     "qué",     "se",     "ser",
      "si",    "sobre", "son",   "su",    "sus",   "te",      "ti",      "tu",     "tus",
      "u",     "un",    "una",   "unas",  "uno",   "unos",    "y",       "ya",     "yo"};
  return words;
}

// All resources the task-1 extractor reads. Immutable once built.
struct FeatureResources {
  std::shared_ptr<const EmbeddingTable> table;
  Lexicon lexicon;
  MarkerLists markers;
  MarkerIndex marker_lookup;
  WordPolarityModel polarity;
  WordSet negators = default_negators();
  WordSet stopwords = default_stopwords();
  std::vector<std::string> bow_vocabulary;
  std::vector<double> positive_centroid;
  std::vector<double> negative_centroid;
  double near_threshold = kDefaultNearThreshold;

  std::size_t dimension() const { return table ? table->dimension() : 0; }
};

// Mean vector of the in-vocabulary members of a word set.
inline std::vector<double> lexicon_centroid(const WordSet& words, const EmbeddingTable& table) {
  std::vector<std::string> list(words.begin(), words.end());
  return centroid(list, table);
}

inline FeatureResources make_feature_resources(std::shared_ptr<const EmbeddingTable> table,
                                               Lexicon lexicon, MarkerLists markers,
                                               WordPolarityModel polarity,
                                               std::vector<std::string> bow_vocabulary,
                                               WordSet negators = default_negators(),
                                               WordSet stopwords = default_stopwords(),
                                               double near_threshold = kDefaultNearThreshold) {
  if (!table) throw Error("feature resources need an embedding table");
  if (bow_vocabulary.size() != kBowWords)
    throw Error("bag-of-words vocabulary must hold exactly " + std::to_string(kBowWords) +
                " words, got " + std::to_string(bow_vocabulary.size()));
  if (polarity.svr.weights.size() != table->dimension())
    throw Error("word-polarity model dimension does not match the embedding table");
  FeatureResources r;
  r.positive_centroid = lexicon_centroid(lexicon.positive, *table);
  r.negative_centroid = lexicon_centroid(lexicon.negative, *table);
  r.table = std::move(table);
  r.lexicon = std::move(lexicon);
  r.marker_lookup = marker_index(markers);
  r.markers = std::move(markers);
  r.polarity = std::move(polarity);
  r.bow_vocabulary = std::move(bow_vocabulary);
  r.negators = std::move(negators);
  r.stopwords = std::move(stopwords);
  r.near_threshold = near_threshold;
  return r;
}

// ---------------------------------------------------------------------------
// Individual feature groups.

// Word-polarity scores of the non-stopword, in-vocabulary tokens, keeping the
// nine of largest magnitude in descending |value| order. Shorter lists are
// repeated cyclically; no candidate at all gives nine zeros.
inline std::array<double, kTopPolarities> top9_polarities(std::span<const std::string> tokens,
                                                          const FeatureResources& res) {
  std::vector<double> scores;
  for (const auto& tok : tokens) {
    if (res.stopwords.count(tok)) continue;
    auto v = res.table->lookup(tok);
    if (v.empty()) continue;
    scores.push_back(word_polarity(res.polarity, v));
  }
  std::stable_sort(scores.begin(), scores.end(),
                   [](double a, double b) { return std::abs(a) > std::abs(b); });
  std::array<double, kTopPolarities> out{};
  if (scores.empty()) return out;
  std::size_t keep = std::min(scores.size(), kTopPolarities);
  for (std::size_t i = 0; i < kTopPolarities; ++i) out[i] = scores[i % keep];
  return out;
}

struct PolarityCounts {
  std::size_t positive = 0;
  std::size_t negative = 0;

  bool operator==(const PolarityCounts&) const = default;
};

// Token occurrences in each lexicon side (repeats count).
inline PolarityCounts lexicon_counts(std::span<const std::string> tokens, const Lexicon& lex) {
  PolarityCounts c;
  for (const auto& t : tokens) {
    if (lex.positive.count(t)) ++c.positive;
    if (lex.negative.count(t)) ++c.negative;
  }
  return c;
}

// Tokens whose vector lies within the cosine threshold of the positive /
// negative lexicon centroid. OOV tokens never count.
inline PolarityCounts near_centroid_counts(std::span<const std::string> tokens,
                                           const FeatureResources& res) {
  PolarityCounts c;
  for (const auto& t : tokens) {
    auto v = res.table->lookup(t);
    if (v.empty()) continue;
    if (cosine(v, res.positive_centroid) >= res.near_threshold) ++c.positive;
    if (cosine(v, res.negative_centroid) >= res.near_threshold) ++c.negative;
  }
  return c;
}

inline std::array<std::size_t, kNumClasses> marker_counts(std::span<const std::string> tokens,
                                                          const MarkerIndex& markers) {
  std::array<std::size_t, kNumClasses> c{};
  for (const auto& t : tokens) {
    auto it = markers.find(t);
    if (it != markers.end()) ++c[it->second];
  }
  return c;
}

// Lexicon vote with negation scope. A negator opens a scope that runs to the
// next punctuation token; lexicon words inside it vote for the opposite side.
inline Polarity tentative_polarity(std::span<const std::string> tokens, const Lexicon& lex,
                                   const WordSet& negators) {
  std::size_t pos = 0, neg = 0;
  bool in_scope = false;
  for (const auto& t : tokens) {
    if (is_punctuation_token(t)) {
      in_scope = false;
      continue;
    }
    if (negators.count(t)) {
      in_scope = true;
      continue;
    }
    bool is_pos = lex.positive.count(t) != 0;
    bool is_neg = lex.negative.count(t) != 0;
    if (in_scope) std::swap(is_pos, is_neg);
    pos += is_pos;
    neg += is_neg;
  }
  if (pos > neg) return Polarity::P;
  if (neg > pos) return Polarity::N;
  return pos > 0 ? Polarity::NEU : Polarity::NONE;
}

// Tokens that can enter a bag-of-words vocabulary.
inline bool is_bow_candidate(const std::string& tok, const WordSet& stopwords) {
  return !stopwords.count(tok) && !is_symbol_token(tok);
}

inline std::map<std::string, std::size_t> document_frequencies(
    std::span<const TokenizedRecord> corpus, const WordSet& stopwords) {
  std::map<std::string, std::size_t> df;
  for (const auto& rec : corpus) {
    std::set<std::string> distinct(rec.tweet.tokens.begin(), rec.tweet.tokens.end());
    for (const auto& w : distinct)
      if (is_bow_candidate(w, stopwords)) ++df[w];
  }
  return df;
}

// The k non-stopword words found in the most training tweets; ties go to
// the lexicographically smaller word. Fewer than k words are returned only
// when the corpus has fewer candidates.
inline std::vector<std::string> top_k_relevant_words(std::span<const TokenizedRecord> corpus,
                                                     const WordSet& stopwords,
                                                     std::size_t k = kBowWords) {
  auto df = document_frequencies(corpus, stopwords);
  if (df.empty()) throw Error("top_k_relevant_words: no candidate words after stopword filtering");
  std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) out.push_back(ranked[i].first);
  return out;
}

// ---------------------------------------------------------------------------
// Task 1 vector.

// Offsets of each block inside the flat task-1 vector for embedding
// dimension d. With d = 300 the total is 328.
struct Task1Layout {
  std::size_t dim;
  std::size_t centroid() const { return 0; }
  std::size_t top_polarities() const { return dim; }
  std::size_t lexicon() const { return dim + 9; }
  std::size_t near_centroid() const { return dim + 11; }
  std::size_t markers() const { return dim + 13; }
  std::size_t surface() const { return dim + 17; }
  std::size_t tentative() const { return dim + 19; }
  std::size_t bow() const { return dim + 23; }
  std::size_t total() const { return dim + 28; }
};

struct Task1Features {
  std::vector<double> centroid;
  std::array<double, kTopPolarities> top_polarities{};
  PolarityCounts lexicon;
  PolarityCounts near_centroid;
  std::array<std::size_t, kNumClasses> markers{};
  SurfaceFlags surface;
  Polarity tentative = Polarity::NONE;
  std::array<bool, kBowWords> bow{};

  std::vector<double> flatten() const {
    std::vector<double> v;
    v.reserve(Task1Layout{centroid.size()}.total());
    v.insert(v.end(), centroid.begin(), centroid.end());
    v.insert(v.end(), top_polarities.begin(), top_polarities.end());
    v.push_back(static_cast<double>(lexicon.positive));
    v.push_back(static_cast<double>(lexicon.negative));
    v.push_back(static_cast<double>(near_centroid.positive));
    v.push_back(static_cast<double>(near_centroid.negative));
    for (auto m : markers) v.push_back(static_cast<double>(m));
    v.push_back(surface.had_char_repetition ? 1.0 : 0.0);
    v.push_back(surface.had_all_caps_word ? 1.0 : 0.0);
    for (auto p : kAllPolarities) v.push_back(p == tentative ? 1.0 : 0.0);
    for (bool b : bow) v.push_back(b ? 1.0 : 0.0);
    return v;
  }
};

inline Task1Features extract_task1(const TokenizedTweet& tweet, const FeatureResources& res) {
  const auto& toks = tweet.tokens;
  Task1Features f;
  f.centroid = centroid(toks, *res.table);
  f.top_polarities = top9_polarities(toks, res);
  f.lexicon = lexicon_counts(toks, res.lexicon);
  f.near_centroid = near_centroid_counts(toks, res);
  f.markers = marker_counts(toks, res.marker_lookup);
  f.surface = {tweet.had_char_repetition, tweet.had_all_caps_word};
  f.tentative = tentative_polarity(toks, res.lexicon, res.negators);
  for (std::size_t i = 0; i < kBowWords && i < res.bow_vocabulary.size(); ++i)
    f.bow[i] = std::find(toks.begin(), toks.end(), res.bow_vocabulary[i]) != toks.end();
  return f;
}

// ---------------------------------------------------------------------------
// Task 2 (aspect-level) vectors.

// Sorted aspect names; index size() is the reserved slot for aspects never
// seen in training.
struct AspectInventory {
  std::vector<std::string> aspects;

  static AspectInventory from_corpus(std::span<const TokenizedRecord> corpus) {
    std::set<std::string> s;
    for (const auto& r : corpus)
      if (!r.record.aspect.empty()) s.insert(r.record.aspect);
    return {{s.begin(), s.end()}};
  }

  std::size_t slots() const { return aspects.size() + 1; }

  std::size_t slot_of(const std::string& aspect) const {
    auto it = std::lower_bound(aspects.begin(), aspects.end(), aspect);
    if (it != aspects.end() && *it == aspect) return static_cast<std::size_t>(it - aspects.begin());
    return aspects.size();
  }

  void append_one_hot(const std::string& aspect, std::vector<double>& out) const {
    std::size_t s = slot_of(aspect);
    for (std::size_t i = 0; i < slots(); ++i) out.push_back(i == s ? 1.0 : 0.0);
  }
};

// Full bag-of-words vocabulary for the aspect classifier: candidate words in
// at least `min_df` training tweets, sorted.
inline std::vector<std::string> build_bow_vocabulary(std::span<const TokenizedRecord> corpus,
                                                     const WordSet& stopwords,
                                                     std::size_t min_df = 2) {
  std::vector<std::string> vocab;
  for (const auto& [w, n] : document_frequencies(corpus, stopwords))
    if (n >= min_df) vocab.push_back(w);
  return vocab;
}

// Binary bag of words, the two surface flags, the four marker counts and the
// aspect one-hot (with its unknown slot).
inline std::vector<double> extract_svm1(const TokenizedRecord& rec, const MarkerIndex& markers,
                                        std::span<const std::string> vocabulary,
                                        const AspectInventory& aspects) {
  std::vector<double> v(vocabulary.size(), 0.0);
  for (const auto& t : rec.tweet.tokens) {
    auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), t);
    if (it != vocabulary.end() && *it == t) v[static_cast<std::size_t>(it - vocabulary.begin())] = 1.0;
  }
  v.push_back(rec.tweet.had_char_repetition ? 1.0 : 0.0);
  v.push_back(rec.tweet.had_all_caps_word ? 1.0 : 0.0);
  for (auto c : marker_counts(rec.tweet.tokens, markers)) v.push_back(static_cast<double>(c));
  aspects.append_one_hot(rec.record.aspect, v);
  return v;
}

// Tweet centroid followed by the aspect one-hot.
inline std::vector<double> extract_svm2(const TokenizedRecord& rec, const EmbeddingTable& table,
                                        const AspectInventory& aspects) {
  auto v = centroid(rec.tweet.tokens, table);
  aspects.append_one_hot(rec.record.aspect, v);
  return v;
}

}  // namespace tweetpol
