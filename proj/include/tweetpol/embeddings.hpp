#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "tweetpol/corpus_io.hpp"
#include "tweetpol/polarity.hpp"

namespace tweetpol {

// Word -> dense vector table. Rows are stored contiguously in insertion
// order; a later entry for the same word overwrites the earlier row.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  const std::vector<std::string>& words() const { return words_; }

  bool contains(const std::string& word) const { return index_.count(word) != 0; }

  // Empty span for out-of-vocabulary words.
  std::span<const double> lookup(const std::string& word) const {
    auto it = index_.find(word);
    if (it == index_.end()) return {};
    return row(it->second);
  }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dimension_, dimension_};
  }

  void insert(const std::string& word, std::span<const double> vec) {
    if (dimension_ == 0) dimension_ = vec.size();
    if (vec.size() != dimension_)
      throw Error("embedding for \"" + word + "\" has " + std::to_string(vec.size()) +
                  " components, table dimension is " + std::to_string(dimension_));
    for (double v : vec)
      if (!std::isfinite(v)) throw Error("non-finite embedding component for \"" + word + "\"");
    auto [it, fresh] = index_.emplace(word, words_.size());
    if (fresh) {
      words_.push_back(word);
      data_.insert(data_.end(), vec.begin(), vec.end());
    } else {
      std::copy(vec.begin(), vec.end(), data_.begin() + it->second * dimension_);
    }
  }

 private:
  std::size_t dimension_ = 0;
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Text format: "word v1 v2 ... vd" per line, space separated. The dimension
// is taken from the first non-blank line.
inline EmbeddingTable read_embeddings(std::istream& in, const std::string& source = "<embeddings>") {
  EmbeddingTable table;
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> vec;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t pos = line.find_first_not_of(' ');
    if (pos == std::string::npos) continue;
    std::size_t end = line.find(' ', pos);
    std::string word = line.substr(pos, end - pos);
    vec.clear();
    while (end != std::string::npos) {
      pos = line.find_first_not_of(' ', end);
      if (pos == std::string::npos) break;
      end = line.find(' ', pos);
      std::size_t stop = end == std::string::npos ? line.size() : end;
      double v = 0.0;
      auto res = std::from_chars(line.data() + pos, line.data() + stop, v);
      if (res.ec != std::errc() || res.ptr != line.data() + stop || !std::isfinite(v))
        throw ParseError(source, lineno,
                         "non-numeric component \"" + line.substr(pos, stop - pos) + "\"");
      vec.push_back(v);
    }
    if (vec.empty()) throw ParseError(source, lineno, "entry \"" + word + "\" has no components");
    if (table.dimension() != 0 && vec.size() != table.dimension())
      throw ParseError(source, lineno,
                       "dimension mismatch: expected " + std::to_string(table.dimension()) +
                           " components, found " + std::to_string(vec.size()));
    table.insert(word, vec);
  }
  return table;
}

inline EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file: " + path.string());
  return read_embeddings(in, path.string());
}

inline void write_embeddings(std::ostream& out, const EmbeddingTable& table,
                             int precision = std::numeric_limits<double>::max_digits10) {
  std::ostringstream line;
  line << std::setprecision(precision);
  for (std::size_t i = 0; i < table.size(); ++i) {
    line.str("");
    line << table.words()[i];
    for (double v : table.row(i)) line << ' ' << v;
    out << line.str() << '\n';
  }
}

// Mean of the in-vocabulary token vectors; the zero vector when none is known.
inline std::vector<double> centroid(std::span<const std::string> tokens,
                                    const EmbeddingTable& table) {
  std::vector<double> out(table.dimension(), 0.0);
  std::size_t hits = 0;
  for (const auto& tok : tokens) {
    auto v = table.lookup(tok);
    if (v.empty()) continue;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += v[k];
    ++hits;
  }
  if (hits > 0)
    for (double& x : out) x /= static_cast<double>(hits);
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Cosine similarity; 0 when either vector has zero norm.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error("cosine: length mismatch (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  double na = std::sqrt(dot(a, a));
  double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace tweetpol
