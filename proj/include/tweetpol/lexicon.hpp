#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tweetpol/embeddings.hpp"
#include "tweetpol/preprocess.hpp"
#include "tweetpol/svm.hpp"

namespace tweetpol {

using WordSet = std::set<std::string>;

struct Lexicon {
  WordSet positive;
  WordSet negative;

  std::size_t size() const { return positive.size() + negative.size(); }
  bool operator==(const Lexicon&) const = default;
};

using InflectionMap = std::map<std::string, std::vector<std::string>>;

// One word per line; blank lines and lines starting with '#' are ignored.
inline WordSet load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open word list: " + path.string());
  WordSet words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t");
    words.insert(line.substr(b, e - b + 1));
  }
  return words;
}

inline void save_word_list(const std::filesystem::path& path, const WordSet& words) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write word list: " + path.string());
  for (const auto& w : words) out << w << '\n';
}

// "lemma<TAB>form1,form2,..." per line. The lemma is always added to its
// own forms.
inline InflectionMap load_inflections(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open inflection file: " + path.string());
  InflectionMap map;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw ParseError(path.string(), lineno, "expected \"lemma<TAB>form1,form2,...\"");
    std::string lemma = line.substr(0, tab);
    auto& forms = map[lemma];
    std::set<std::string> seen(forms.begin(), forms.end());
    auto add = [&](const std::string& f) {
      if (!f.empty() && seen.insert(f).second) forms.push_back(f);
    };
    add(lemma);
    std::size_t pos = tab + 1;
    while (pos <= line.size()) {
      auto comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      add(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
  }
  return map;
}

namespace detail {

inline void drop_shared_words(Lexicon& lex) {
  std::vector<std::string> shared;
  for (const auto& w : lex.positive)
    if (lex.negative.count(w)) shared.push_back(w);
  for (const auto& w : shared) {
    lex.positive.erase(w);
    lex.negative.erase(w);
  }
}

inline WordSet intersect(const WordSet& a, const WordSet& b) {
  WordSet out;
  for (const auto& w : a)
    if (b.count(w)) out.insert(w);
  return out;
}

}  // namespace detail

// Words kept only when every input lexicon agrees on the polarity; a word
// that ends up on both sides is removed from both.
inline Lexicon intersect_lexicons(std::span<const Lexicon> lexicons) {
  if (lexicons.empty()) return {};
  Lexicon out = lexicons[0];
  for (std::size_t i = 1; i < lexicons.size(); ++i) {
    out.positive = detail::intersect(out.positive, lexicons[i].positive);
    out.negative = detail::intersect(out.negative, lexicons[i].negative);
  }
  detail::drop_shared_words(out);
  return out;
}

inline Lexicon intersect_lexicons(const Lexicon& l1, const Lexicon& l2, const Lexicon& l3) {
  std::array<Lexicon, 3> all{l1, l2, l3};
  return intersect_lexicons(all);
}

inline Lexicon expand_with_inflections(const Lexicon& lex, const InflectionMap& inflections) {
  auto expand = [&](const WordSet& in) {
    WordSet out;
    for (const auto& lemma : in) {
      auto it = inflections.find(lemma);
      if (it == inflections.end()) {
        out.insert(lemma);
      } else {
        out.insert(it->second.begin(), it->second.end());
      }
    }
    return out;
  };
  Lexicon out{expand(lex.positive), expand(lex.negative)};
  detail::drop_shared_words(out);
  return out;
}

// ---------------------------------------------------------------------------
// Category markers.

struct MarkerLists {
  std::array<std::vector<std::string>, kNumClasses> words;  // sorted, per class
  double threshold = 0.75;
  std::size_t min_count = 3;

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& l : words) n += l.size();
    return n;
  }
};

using MarkerIndex = std::unordered_map<std::string, std::size_t>;

// Word -> class index lookup over all four lists.
inline MarkerIndex marker_index(const MarkerLists& m) {
  MarkerIndex idx;
  for (std::size_t c = 0; c < kNumClasses; ++c)
    for (const auto& w : m.words[c]) idx.emplace(w, c);
  return idx;
}

// True for tokens that carry no letter or digit (punctuation, symbols).
inline bool is_symbol_token(std::string_view tok) {
  for (char32_t c : utf8::decode(tok))
    if (utf8::is_letter(c) || utf8::is_digit(c)) return false;
  return true;
}

// A word is a marker of class c when at least `threshold` of the tweets that
// contain it are labelled c. Each tweet counts a word once; words seen in
// fewer than `min_count` tweets, and symbol-only tokens, are ignored.
inline MarkerLists compute_markers(std::span<const TokenizedRecord> corpus, double threshold = 0.75,
                                   std::size_t min_count = 3) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw Error("marker threshold must lie in (0, 1]");
  if (min_count < 1) throw Error("marker min_count must be at least 1");
  std::map<std::string, std::array<std::size_t, kNumClasses>> tally;
  for (const auto& rec : corpus) {
    std::set<std::string> distinct(rec.tweet.tokens.begin(), rec.tweet.tokens.end());
    for (const auto& w : distinct) {
      if (is_symbol_token(w)) continue;
      auto& counts = tally[w];
      ++counts[index_of(rec.record.label)];
    }
  }
  MarkerLists out;
  out.threshold = threshold;
  out.min_count = min_count;
  for (const auto& [word, counts] : tally) {
    std::size_t total = 0;
    for (auto c : counts) total += c;
    if (total < min_count) continue;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      // counts[c] / total >= threshold, with slack for rounding in threshold * total.
      double need = threshold * static_cast<double>(total);
      if (static_cast<double>(counts[c]) >= need - 1e-12 * need) {
        out.words[c].push_back(word);
        break;
      }
    }
  }
  return out;
}

inline nlohmann::json to_json(const MarkerLists& m) {
  nlohmann::json j;
  for (auto p : kAllPolarities) j[std::string(to_string(p))] = m.words[index_of(p)];
  j["threshold"] = m.threshold;
  j["min_count"] = m.min_count;
  return j;
}

inline MarkerLists markers_from_json(const nlohmann::json& j) {
  MarkerLists m;
  for (auto p : kAllPolarities)
    m.words[index_of(p)] = j.at(std::string(to_string(p))).get<std::vector<std::string>>();
  m.threshold = j.at("threshold").get<double>();
  m.min_count = j.at("min_count").get<std::size_t>();
  return m;
}

// ---------------------------------------------------------------------------
// Word polarity regressor.

struct WordPolarityModel {
  svm::SvrModel svr;
  std::size_t training_words = 0;
};

inline svm::SvrConfig default_polarity_svr_config() {
  svm::SvrConfig c;
  c.C = 1.0;
  c.epsilon = 0.1;
  return c;
}

// Linear epsilon-SVR from word vectors to +1 (positive lexicon) / -1
// (negative lexicon). Lexicon words missing from the table are skipped.
inline WordPolarityModel train_polarity_predictor(const Lexicon& lex, const EmbeddingTable& table,
                                                  const svm::SvrConfig& config =
                                                      default_polarity_svr_config()) {
  Matrix X;
  std::vector<double> t;
  bool has_pos = false, has_neg = false;
  for (const auto& w : lex.positive) {
    auto v = table.lookup(w);
    if (v.empty()) continue;
    X.push_row(v);
    t.push_back(1.0);
    has_pos = true;
  }
  for (const auto& w : lex.negative) {
    auto v = table.lookup(w);
    if (v.empty()) continue;
    X.push_row(v);
    t.push_back(-1.0);
    has_neg = true;
  }
  if (t.size() < 2 || !has_pos || !has_neg)
    throw Error("train_polarity_predictor: need at least one positive and one negative lexicon "
                "word present in the embedding table (found " +
                std::to_string(t.size()) + " usable words)");
  return {svm::train_svr(X, t, config), t.size()};
}

inline double word_polarity(const WordPolarityModel& model, std::span<const double> vec) {
  return svm::predict(model.svr, vec);
}

// 0 for out-of-vocabulary words.
inline double word_polarity(const WordPolarityModel& model, const std::string& word,
                            const EmbeddingTable& table) {
  auto v = table.lookup(word);
  if (v.empty()) return 0.0;
  return svm::predict(model.svr, v);
}

inline nlohmann::json to_json(const WordPolarityModel& m) {
  return {{"kind", "word-polarity"},
          {"version", kVersion},
          {"format_version", svm::kModelFormatVersion},
          {"training_words", m.training_words},
          {"svr", svm::to_json(m.svr)}};
}

inline WordPolarityModel polarity_model_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "word-polarity") throw Error("not a word-polarity model file");
  return {svm::svr_from_json(j.at("svr")), j.value("training_words", std::size_t{0})};
}

}  // namespace tweetpol
