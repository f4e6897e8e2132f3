#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tweetpol/polarity.hpp"

namespace tweetpol {

struct TweetRecord {
  std::string id;
  std::string text;
  Polarity label = Polarity::NONE;
  std::string aspect;  // empty unless the record came from an aspect corpus

  bool operator==(const TweetRecord&) const = default;
};

struct LabeledCorpus {
  std::vector<TweetRecord> records;
  std::string provenance;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

enum class CorpusFormat { Jsonl, Tsv };

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline CorpusFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  if (ext == ".tsv" || ext == ".txt") return CorpusFormat::Tsv;
  return CorpusFormat::Jsonl;
}

namespace detail {

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; });
}

inline Polarity parse_label_or_throw(const std::string& source, std::size_t line,
                                     std::string_view value) {
  auto p = parse_polarity(value);
  if (!p) {
    throw ParseError(source, line,
                     "unknown label \"" + std::string(value) + "\" (expected P, N, NEU or NONE)");
  }
  return *p;
}

}  // namespace detail

// Reads a corpus from a stream. Blank lines are skipped. `source` names the
// input in error messages.
inline LabeledCorpus read_corpus(std::istream& in, CorpusFormat format,
                                 const std::string& source = "<corpus>") {
  LabeledCorpus corpus;
  corpus.provenance = source;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::is_blank(line)) continue;
    TweetRecord rec;
    if (format == CorpusFormat::Tsv) {
      auto t1 = line.find('\t');
      auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
      if (t2 == std::string::npos)
        throw ParseError(source, lineno, "expected 3 tab-separated columns: id, label, text");
      rec.id = line.substr(0, t1);
      rec.label = detail::parse_label_or_throw(source, lineno, line.substr(t1 + 1, t2 - t1 - 1));
      rec.text = line.substr(t2 + 1);
    } else {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(source, lineno, std::string("invalid JSON: ") + e.what());
      }
      if (!j.is_object()) throw ParseError(source, lineno, "expected a JSON object");
      for (const char* key : {"id", "text", "label"}) {
        if (!j.contains(key) || !j[key].is_string())
          throw ParseError(source, lineno, std::string("missing string field \"") + key + "\"");
      }
      rec.id = j["id"].get<std::string>();
      rec.text = j["text"].get<std::string>();
      rec.label = detail::parse_label_or_throw(source, lineno, j["label"].get<std::string>());
      if (j.contains("aspect")) {
        if (!j["aspect"].is_string() || j["aspect"].get<std::string>().empty())
          throw ParseError(source, lineno, "\"aspect\" must be a non-empty string");
        rec.aspect = j["aspect"].get<std::string>();
      }
    }
    if (rec.id.empty()) throw ParseError(source, lineno, "empty id");
    if (detail::is_blank(rec.text)) throw ParseError(source, lineno, "empty text");
    if (!seen.insert(rec.id).second)
      throw ParseError(source, lineno, "duplicate id \"" + rec.id + "\"");
    corpus.records.push_back(std::move(rec));
  }
  return corpus;
}

inline LabeledCorpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path.string());
  return read_corpus(in, format, path.string());
}

inline LabeledCorpus load_corpus(const std::filesystem::path& path) {
  return load_corpus(path, format_from_path(path));
}

inline nlohmann::json record_to_json(const TweetRecord& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["text"] = r.text;
  j["label"] = std::string(to_string(r.label));
  if (!r.aspect.empty()) j["aspect"] = r.aspect;
  return j;
}

inline void write_corpus(std::ostream& out, const LabeledCorpus& corpus, CorpusFormat format) {
  for (const auto& r : corpus.records) {
    if (format == CorpusFormat::Tsv) {
      if (r.text.find_first_of("\t\n") != std::string::npos || r.id.find('\t') != std::string::npos)
        throw Error("record \"" + r.id + "\" cannot be written as TSV (embedded tab or newline)");
      out << r.id << '\t' << to_string(r.label) << '\t' << r.text << '\n';
    } else {
      out << record_to_json(r).dump() << '\n';
    }
  }
}

inline void save_corpus(const std::filesystem::path& path, const LabeledCorpus& corpus,
                        CorpusFormat format) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus file: " + path.string());
  write_corpus(out, corpus, format);
}

struct SplitSpec {
  double train_fraction = 0.85;
  std::uint64_t seed = 42;
};

// Number of records of a class with `n` members that go to the training
// side. Rounds up so that a rare class is never absent from training.
inline std::size_t train_share(std::size_t n, double fraction) {
  auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::min(k, n);
}

// Per-class seeded shuffle followed by a ceil(fraction * n) cut. Both outputs
// keep the input's relative record order.
inline std::pair<LabeledCorpus, LabeledCorpus> stratified_split(const LabeledCorpus& corpus,
                                                                const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw Error("train_fraction must lie strictly between 0 and 1");
  if (corpus.empty()) throw Error("cannot split an empty corpus");

  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < corpus.records.size(); ++i)
    by_class[index_of(corpus.records[i].label)].push_back(i);

  std::mt19937_64 rng(spec.seed);
  std::vector<bool> to_train(corpus.records.size(), false);
  for (auto& members : by_class) {
    // Fisher-Yates with an explicit modulo draw keeps the split identical
    // across standard library implementations.
    for (std::size_t i = members.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(members[i - 1], members[j]);
    }
    std::size_t k = train_share(members.size(), spec.train_fraction);
    for (std::size_t i = 0; i < k; ++i) to_train[members[i]] = true;
  }

  LabeledCorpus train, dev;
  train.provenance = corpus.provenance + "#train";
  dev.provenance = corpus.provenance + "#dev";
  for (std::size_t i = 0; i < corpus.records.size(); ++i)
    (to_train[i] ? train : dev).records.push_back(corpus.records[i]);
  return {std::move(train), std::move(dev)};
}

struct ClassShare {
  std::size_t count = 0;
  double fraction = 0.0;
};

inline std::array<ClassShare, kNumClasses> class_distribution(const LabeledCorpus& corpus) {
  std::array<ClassShare, kNumClasses> out{};
  for (const auto& r : corpus.records) ++out[index_of(r.label)].count;
  if (!corpus.empty()) {
    for (auto& s : out)
      s.fraction = static_cast<double>(s.count) / static_cast<double>(corpus.size());
  }
  return out;
}

}  // namespace tweetpol
