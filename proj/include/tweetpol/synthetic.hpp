#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tweetpol/corpus_io.hpp"
#include "tweetpol/embeddings.hpp"
#include "tweetpol/lexicon.hpp"

// Planted-signal data for demos and tests: each class owns a block of
// vocabulary whose vectors cluster around a class prototype, and tweets mix
// class words with shared filler and stopwords.
namespace tweetpol::synthetic {

struct Spec {
  std::size_t tweets = 1000;
  std::size_t dimension = 16;
  std::size_t words_per_class = 24;
  std::size_t filler_words = 60;
  std::array<double, kNumClasses> class_fractions{0.39, 0.32, 0.10, 0.19};
  std::size_t min_signal_tokens = 2;
  std::size_t max_signal_tokens = 4;
  std::size_t min_filler_tokens = 2;
  std::size_t max_filler_tokens = 6;
  // Chance that a tweet also carries one word of a different class.
  double cross_talk = 0.15;
  double prototype_scale = 1.0;
  double word_noise = 0.45;
  std::uint64_t seed = 7;
};

struct Dataset {
  EmbeddingTable table;
  LabeledCorpus corpus;
  Lexicon lexicon;  // half of the P words positive, half of the N words negative
  std::array<std::vector<std::string>, kNumClasses> class_words;
  std::vector<std::string> filler;
};

inline const std::array<const char*, kNumClasses>& class_prefixes() {
  static const std::array<const char*, kNumClasses> p{"bien", "mal", "meh", "dato"};
  return p;
}

// Two-letter syllables; no letter repeats three times in any generated word.
inline std::string syllables(std::size_t i) {
  static const char* cons = "bcdfglmnprstvz";
  static const char* vow = "aeiou";
  std::string s;
  do {
    std::size_t k = i % 70;
    s += cons[k / 5];
    s += vow[k % 5];
    i /= 70;
  } while (i > 0);
  return s;
}

inline double gaussian(std::mt19937_64& rng) {
  // Box-Muller on engine bits for cross-platform reproducibility.
  double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

inline Dataset generate(const Spec& spec) {
  std::mt19937_64 rng(spec.seed);
  Dataset ds;
  ds.table = EmbeddingTable(spec.dimension);

  std::array<std::vector<double>, kNumClasses> proto;
  for (auto& p : proto) {
    p.resize(spec.dimension);
    double norm = 0.0;
    for (double& v : p) {
      v = gaussian(rng);
      norm += v * v;
    }
    for (double& v : p) v *= spec.prototype_scale / std::sqrt(norm);
  }
  std::vector<double> vec(spec.dimension);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (std::size_t i = 0; i < spec.words_per_class; ++i) {
      std::string w = std::string(class_prefixes()[c]) + syllables(i);
      for (std::size_t k = 0; k < spec.dimension; ++k)
        vec[k] = proto[c][k] + spec.word_noise * gaussian(rng) / std::sqrt(double(spec.dimension));
      ds.table.insert(w, vec);
      ds.class_words[c].push_back(w);
    }
  }
  for (std::size_t i = 0; i < spec.filler_words; ++i) {
    std::string w = "cosa" + syllables(i);
    for (std::size_t k = 0; k < spec.dimension; ++k)
      vec[k] = 0.6 * gaussian(rng) / std::sqrt(double(spec.dimension));
    ds.table.insert(w, vec);
    ds.filler.push_back(w);
  }
  for (const char* sw : {"de", "la", "que", "el", "en"}) {
    for (std::size_t k = 0; k < spec.dimension; ++k)
      vec[k] = 0.3 * gaussian(rng) / std::sqrt(double(spec.dimension));
    ds.table.insert(sw, vec);
  }

  const auto& pw = ds.class_words[index_of(Polarity::P)];
  const auto& nw = ds.class_words[index_of(Polarity::N)];
  for (std::size_t i = 0; i < pw.size() / 2; ++i) ds.lexicon.positive.insert(pw[i]);
  for (std::size_t i = 0; i < nw.size() / 2; ++i) ds.lexicon.negative.insert(nw[i]);

  static const std::array<const char*, 5> stop{"de", "la", "que", "el", "en"};
  static const std::array<const char*, 4> punct{",", ".", "!", "?"};
  ds.corpus.provenance = "synthetic";
  for (std::size_t t = 0; t < spec.tweets; ++t) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    std::size_t cls = kNumClasses - 1;
    double acc = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      acc += spec.class_fractions[c];
      if (u < acc) {
        cls = c;
        break;
      }
    }
    std::vector<std::string> words;
    std::size_t ns = uniform_int(rng, spec.min_signal_tokens, spec.max_signal_tokens);
    for (std::size_t i = 0; i < ns; ++i)
      words.push_back(ds.class_words[cls][rng() % ds.class_words[cls].size()]);
    std::size_t nf = uniform_int(rng, spec.min_filler_tokens, spec.max_filler_tokens);
    for (std::size_t i = 0; i < nf; ++i) {
      if (rng() % 3 == 0)
        words.push_back(stop[rng() % stop.size()]);
      else
        words.push_back(ds.filler[rng() % ds.filler.size()]);
    }
    if (static_cast<double>(rng() >> 11) * 0x1.0p-53 < spec.cross_talk) {
      std::size_t other = (cls + 1 + rng() % (kNumClasses - 1)) % kNumClasses;
      words.push_back(ds.class_words[other][rng() % ds.class_words[other].size()]);
    }
    for (std::size_t i = words.size(); i > 1; --i) std::swap(words[i - 1], words[rng() % i]);
    std::string text;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) text += ' ';
      text += words[i];
      if (rng() % 8 == 0) text += punct[rng() % punct.size()];
    }
    TweetRecord rec;
    rec.id = "t" + std::to_string(t);
    rec.text = text;
    rec.label = polarity_from_index(cls);
    ds.corpus.records.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace tweetpol::synthetic
