#pragma once

#include <array>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tweetpol/preprocess.hpp"

namespace fixture {

inline tweetpol::TokenizedRecord record(std::vector<std::string> tokens, tweetpol::Polarity label,
                                        std::string id = "", std::string aspect = "") {
  tweetpol::TokenizedRecord r;
  r.record.id = std::move(id);
  r.record.label = label;
  r.record.aspect = std::move(aspect);
  for (const auto& t : tokens) r.record.text += (r.record.text.empty() ? "" : " ") + t;
  r.tweet.tokens = std::move(tokens);
  r.tweet.original = r.record.text;
  return r;
}

// Tweets drawn from a small vocabulary with a mild class bias, so that some
// words qualify as markers and most do not.
inline std::vector<tweetpol::TokenizedRecord> random_corpus(std::size_t n, std::mt19937_64& rng,
                                                            std::size_t vocab = 25) {
  std::vector<tweetpol::TokenizedRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto label = tweetpol::polarity_from_index(rng() % 4);
    std::vector<std::string> toks;
    std::size_t len = 1 + rng() % 8;
    for (std::size_t k = 0; k < len; ++k) {
      std::size_t w = rng() % vocab;
      if (rng() % 3 == 0) w = (tweetpol::index_of(label) * 5 + rng() % 5) % vocab;
      toks.push_back("w" + std::to_string(w));
      if (rng() % 10 == 0) toks.push_back(",");
    }
    out.push_back(record(std::move(toks), label, "id" + std::to_string(i)));
  }
  return out;
}

// Naive recount: for every word, walk the whole corpus again. Thresholds are
// compared as exact fractions num/den.
inline std::array<std::vector<std::string>, 4> brute_force_markers(
    const std::vector<tweetpol::TokenizedRecord>& c,
    std::size_t num, std::size_t den, std::size_t min_count) {
  std::set<std::string> words;
  for (const auto& r : c)
    for (const auto& t : r.tweet.tokens)
      if (t != "," && t != ".") words.insert(t);
  std::array<std::vector<std::string>, 4> out;
  for (const auto& w : words) {
    std::array<std::size_t, 4> cnt{};
    std::size_t total = 0;
    for (const auto& r : c) {
      bool has = false;
      for (const auto& t : r.tweet.tokens) has = has || t == w;
      if (has) {
        ++cnt[tweetpol::index_of(r.record.label)];
        ++total;
      }
    }
    if (total < min_count) continue;
    for (std::size_t k = 0; k < 4; ++k)
      if (cnt[k] * den >= num * total) {
        out[k].push_back(w);
        break;
      }
  }
  return out;
}

}  // namespace fixture
