#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tweetpol/cnn.hpp"
#include "tweetpol/corpus_io.hpp"
#include "tweetpol/embeddings.hpp"
#include "tweetpol/ensemble.hpp"
#include "tweetpol/features.hpp"
#include "tweetpol/lexicon.hpp"
#include "tweetpol/svm.hpp"

namespace tweetpol::pipeline {

// ---------------------------------------------------------------------------
// Configuration: flat "key = value" text, '#' starts a comment line.

struct PipelineConfig {
  std::filesystem::path embeddings;
  std::filesystem::path positive_lexicon;
  std::filesystem::path negative_lexicon;
  std::filesystem::path inflections;
  std::filesystem::path negators;
  std::filesystem::path stopwords;
  double marker_threshold = 0.75;
  std::size_t marker_min_count = 3;
  double near_threshold = kDefaultNearThreshold;
  SplitSpec split;
  double svm_C = 1.0;
  std::size_t cnn_max_length = 50;
  std::size_t cnn_batch_size = 32;
  std::size_t cnn_max_epochs = 100;
  std::size_t cnn_patience = 5;
  double cnn_learning_rate = 1e-4;
  std::uint64_t seed = 42;

  void validate() const {
    if (!(marker_threshold > 0.0 && marker_threshold <= 1.0))
      throw Error("marker.threshold must lie in (0, 1]");
    if (marker_min_count < 1) throw Error("marker.min_count must be at least 1");
    if (!(near_threshold >= -1.0 && near_threshold <= 1.0))
      throw Error("near_threshold must lie in [-1, 1]");
    if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0))
      throw Error("split.fraction must lie strictly between 0 and 1");
    if (!(svm_C > 0.0)) throw Error("svm.C must be positive");
    if (cnn_max_length < 1 || cnn_batch_size < 1 || cnn_max_epochs < 1 || cnn_patience < 1)
      throw Error("cnn.max_length, cnn.batch_size, cnn.max_epochs and cnn.patience must be positive");
    if (!(cnn_learning_rate > 0.0)) throw Error("cnn.learning_rate must be positive");
    for (const auto* p : {&embeddings, &positive_lexicon, &negative_lexicon, &inflections, &negators,
                          &stopwords})
      if (!p->empty() && !std::filesystem::exists(*p)) throw Error("file not found: " + p->string());
  }
};

using KeyValues = std::map<std::string, std::string>;

inline KeyValues read_key_values(std::istream& in, const std::string& source = "<config>") {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(source, lineno, "expected \"key = value\"");
    std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ParseError(source, lineno, "empty key");
    if (kv.count(key)) throw ParseError(source, lineno, "duplicate key \"" + key + "\"");
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

namespace detail {

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size())
    throw Error("config key \"" + key + "\": cannot parse \"" + value + "\" as a number");
  return out;
}

}  // namespace detail

// Unknown keys are errors so that typos do not silently fall back to defaults.
inline void apply_config(PipelineConfig& cfg, const KeyValues& kv) {
  using detail::parse_number;
  for (const auto& [k, v] : kv) {
    if (k == "embeddings") cfg.embeddings = v;
    else if (k == "lexicon.positive") cfg.positive_lexicon = v;
    else if (k == "lexicon.negative") cfg.negative_lexicon = v;
    else if (k == "inflections") cfg.inflections = v;
    else if (k == "negators") cfg.negators = v;
    else if (k == "stopwords") cfg.stopwords = v;
    else if (k == "marker.threshold") cfg.marker_threshold = parse_number<double>(k, v);
    else if (k == "marker.min_count") cfg.marker_min_count = parse_number<std::size_t>(k, v);
    else if (k == "near_threshold") cfg.near_threshold = parse_number<double>(k, v);
    else if (k == "split.fraction") cfg.split.train_fraction = parse_number<double>(k, v);
    else if (k == "split.seed") cfg.split.seed = parse_number<std::uint64_t>(k, v);
    else if (k == "svm.C") cfg.svm_C = parse_number<double>(k, v);
    else if (k == "cnn.max_length") cfg.cnn_max_length = parse_number<std::size_t>(k, v);
    else if (k == "cnn.batch_size") cfg.cnn_batch_size = parse_number<std::size_t>(k, v);
    else if (k == "cnn.max_epochs") cfg.cnn_max_epochs = parse_number<std::size_t>(k, v);
    else if (k == "cnn.patience") cfg.cnn_patience = parse_number<std::size_t>(k, v);
    else if (k == "cnn.learning_rate") cfg.cnn_learning_rate = parse_number<double>(k, v);
    else if (k == "seed") cfg.seed = parse_number<std::uint64_t>(k, v);
    else throw Error("unknown config key \"" + k + "\"");
  }
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path.string());
  PipelineConfig cfg;
  apply_config(cfg, read_key_values(in, path.string()));
  return cfg;
}

inline WordSet word_list_or(const std::filesystem::path& path, const WordSet& fallback) {
  return path.empty() ? fallback : load_word_list(path);
}

// ---------------------------------------------------------------------------
// SVM model bundle: the OvO classifier plus every resource its feature
// extractor needs, except the embedding table.

enum class SvmTask { Task1, Task2Svm1, Task2Svm2 };

inline std::string to_string(SvmTask t) {
  switch (t) {
    case SvmTask::Task1: return "1";
    case SvmTask::Task2Svm1: return "2-svm1";
    case SvmTask::Task2Svm2: return "2-svm2";
  }
  return "1";
}

inline SvmTask parse_task(const std::string& s) {
  if (s == "1") return SvmTask::Task1;
  if (s == "2-svm1") return SvmTask::Task2Svm1;
  if (s == "2-svm2") return SvmTask::Task2Svm2;
  throw Error("unknown task \"" + s + "\" (expected 1, 2-svm1 or 2-svm2)");
}

struct SvmBundle {
  SvmTask task = SvmTask::Task1;
  std::uint64_t seed = 42;
  std::size_t embedding_dim = 0;
  // Task 1.
  Lexicon lexicon;
  MarkerLists markers;
  WordPolarityModel polarity;
  std::vector<std::string> bow_vocabulary;
  WordSet negators = default_negators();
  WordSet stopwords = default_stopwords();
  double near_threshold = kDefaultNearThreshold;
  // Task 2.
  std::vector<std::string> vocabulary;
  AspectInventory aspects;

  svm::OvoModel ovo;
};

inline FeatureResources task1_resources(const SvmBundle& b, std::shared_ptr<const EmbeddingTable> table) {
  return make_feature_resources(std::move(table), b.lexicon, b.markers, b.polarity, b.bow_vocabulary,
                                b.negators, b.stopwords, b.near_threshold);
}

// Feature matrix for `corpus` under the bundle's task. `resources` is only
// read for task 1.
inline Matrix feature_matrix(const SvmBundle& b, const FeatureResources* resources,
                             const EmbeddingTable& table, std::span<const TokenizedRecord> corpus) {
  Matrix X;
  MarkerIndex idx;
  if (b.task == SvmTask::Task2Svm1) idx = marker_index(b.markers);
  for (const auto& r : corpus) {
    switch (b.task) {
      case SvmTask::Task1: X.push_row(extract_task1(r.tweet, *resources).flatten()); break;
      case SvmTask::Task2Svm1: X.push_row(extract_svm1(r, idx, b.vocabulary, b.aspects)); break;
      case SvmTask::Task2Svm2: X.push_row(extract_svm2(r, table, b.aspects)); break;
    }
  }
  return X;
}

inline std::vector<std::size_t> label_indices(std::span<const TokenizedRecord> corpus) {
  std::vector<std::size_t> y;
  y.reserve(corpus.size());
  for (const auto& r : corpus) y.push_back(index_of(r.record.label));
  return y;
}

struct SvmTrainingInputs {
  Lexicon lexicon;
  std::optional<WordPolarityModel> polarity;  // trained from the lexicon when absent
  std::optional<MarkerLists> markers;         // computed from the corpus when absent
  WordSet negators = default_negators();
  WordSet stopwords = default_stopwords();
};

// Everything but the classifier: resources derived from the training corpus.
inline SvmBundle prepare_svm_bundle(SvmTask task, std::span<const TokenizedRecord> train,
                                    const EmbeddingTable& table, const SvmTrainingInputs& inputs,
                                    const PipelineConfig& cfg) {
  if (train.empty()) throw Error("empty training corpus");
  SvmBundle b;
  b.task = task;
  b.seed = cfg.seed;
  b.embedding_dim = table.dimension();
  b.near_threshold = cfg.near_threshold;
  b.negators = inputs.negators;
  b.stopwords = inputs.stopwords;
  b.markers = inputs.markers ? *inputs.markers
                             : compute_markers(train, cfg.marker_threshold, cfg.marker_min_count);
  if (task == SvmTask::Task1) {
    b.lexicon = inputs.lexicon;
    b.polarity = inputs.polarity ? *inputs.polarity : train_polarity_predictor(b.lexicon, table);
    b.bow_vocabulary = top_k_relevant_words(train, b.stopwords, kBowWords);
    if (b.bow_vocabulary.size() < kBowWords)
      throw Error("corpus has fewer than " + std::to_string(kBowWords) +
                  " candidate bag-of-words terms");
  } else {
    b.aspects = AspectInventory::from_corpus(train);
    if (task == SvmTask::Task2Svm1) b.vocabulary = build_bow_vocabulary(train, b.stopwords);
  }
  return b;
}

inline Matrix bundle_features(const SvmBundle& b, std::shared_ptr<const EmbeddingTable> table,
                              std::span<const TokenizedRecord> corpus) {
  if (table->dimension() != b.embedding_dim)
    throw Error("embedding dimension " + std::to_string(table->dimension()) +
                " does not match the model's " + std::to_string(b.embedding_dim));
  std::optional<FeatureResources> res;
  if (b.task == SvmTask::Task1) res = task1_resources(b, table);
  return feature_matrix(b, res ? &*res : nullptr, *table, corpus);
}

inline SvmBundle train_svm_bundle(SvmTask task, std::span<const TokenizedRecord> train,
                                  std::shared_ptr<const EmbeddingTable> table,
                                  const SvmTrainingInputs& inputs, const PipelineConfig& cfg) {
  SvmBundle b = prepare_svm_bundle(task, train, *table, inputs, cfg);
  Matrix X = bundle_features(b, table, train);
  svm::OvoConfig oc;
  oc.C = cfg.svm_C;
  oc.seed = cfg.seed;
  b.ovo = svm::train_ovo(X, label_indices(train), kNumClasses, oc);
  return b;
}

inline std::vector<PredictionRecord> predict_svm(const SvmBundle& b,
                                                 std::shared_ptr<const EmbeddingTable> table,
                                                 std::span<const TokenizedRecord> corpus) {
  Matrix X = bundle_features(b, std::move(table), corpus);
  std::vector<PredictionRecord> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    PredictionRecord p;
    p.id = corpus[i].record.id;
    p.proba = svm::predict_distribution(b.ovo, X.row(i));
    p.pred = p.proba->argmax();
    out.push_back(std::move(p));
  }
  return out;
}

inline nlohmann::json to_json(const SvmBundle& b) {
  nlohmann::json j{{"kind", "svm"},
                   {"version", kVersion},
                   {"format_version", svm::kModelFormatVersion},
                   {"task", to_string(b.task)},
                   {"seed", b.seed},
                   {"embedding_dim", b.embedding_dim},
                   {"markers", tweetpol::to_json(b.markers)}};
  if (b.task == SvmTask::Task1) {
    j["lexicon"] = {{"positive", b.lexicon.positive}, {"negative", b.lexicon.negative}};
    j["polarity"] = tweetpol::to_json(b.polarity);
    j["bow_vocabulary"] = b.bow_vocabulary;
    j["negators"] = b.negators;
    j["stopwords"] = b.stopwords;
    j["near_threshold"] = b.near_threshold;
  } else {
    j["aspects"] = b.aspects.aspects;
    if (b.task == SvmTask::Task2Svm1) j["vocabulary"] = b.vocabulary;
  }
  j["ovo"] = svm::to_json(b.ovo);
  return j;
}

inline SvmBundle svm_bundle_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "svm") throw Error("not an SVM model file");
  if (j.at("format_version").get<int>() != svm::kModelFormatVersion)
    throw Error("unsupported SVM model format version");
  SvmBundle b;
  b.task = parse_task(j.at("task").get<std::string>());
  b.seed = j.at("seed").get<std::uint64_t>();
  b.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  b.markers = markers_from_json(j.at("markers"));
  if (b.task == SvmTask::Task1) {
    b.lexicon.positive = j.at("lexicon").at("positive").get<WordSet>();
    b.lexicon.negative = j.at("lexicon").at("negative").get<WordSet>();
    b.polarity = polarity_model_from_json(j.at("polarity"));
    b.bow_vocabulary = j.at("bow_vocabulary").get<std::vector<std::string>>();
    b.negators = j.at("negators").get<WordSet>();
    b.stopwords = j.at("stopwords").get<WordSet>();
    b.near_threshold = j.at("near_threshold").get<double>();
  } else {
    b.aspects.aspects = j.at("aspects").get<std::vector<std::string>>();
    if (b.task == SvmTask::Task2Svm1) b.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
  }
  b.ovo = svm::ovo_from_json(j.at("ovo"));
  return b;
}

// ---------------------------------------------------------------------------
// CNN.

inline std::vector<cnn::SequenceInput> encode_corpus(std::span<const TokenizedRecord> corpus,
                                                     const EmbeddingTable& table, std::size_t max_length) {
  std::vector<cnn::SequenceInput> xs;
  xs.reserve(corpus.size());
  for (const auto& r : corpus) xs.push_back(cnn::encode_sequence(r.tweet.tokens, table, max_length));
  return xs;
}

inline cnn::TrainConfig cnn_train_config(const PipelineConfig& cfg) {
  cnn::TrainConfig tc;
  tc.batch_size = cfg.cnn_batch_size;
  tc.max_epochs = cfg.cnn_max_epochs;
  tc.patience = cfg.cnn_patience;
  tc.seed = cfg.seed;
  tc.adam.learning_rate = cfg.cnn_learning_rate;
  return tc;
}

struct CnnRun {
  cnn::TrainResult result;
  std::uint64_t seed = 42;
};

inline CnnRun train_cnn(std::span<const TokenizedRecord> train, std::span<const TokenizedRecord> val,
                        const EmbeddingTable& table, const PipelineConfig& cfg) {
  auto model = cnn::build_cnn4(table.dimension(), cfg.cnn_max_length, cfg.seed);
  auto tx = encode_corpus(train, table, cfg.cnn_max_length);
  auto vx = encode_corpus(val, table, cfg.cnn_max_length);
  auto ty = label_indices(train);
  auto vy = label_indices(val);
  return {cnn::train_with_early_stopping(std::move(model), tx, ty, vx, vy, cnn_train_config(cfg)),
          cfg.seed};
}

inline nlohmann::json to_json(const CnnRun& run) {
  auto j = cnn::to_json(run.result.model);
  j["seed"] = run.seed;
  j["best_epoch"] = run.result.best_epoch;
  nlohmann::json log = nlohmann::json::array();
  for (const auto& e : run.result.log)
    log.push_back({{"epoch", e.epoch},
                   {"train_loss", e.train_loss},
                   {"val_loss", e.val_loss},
                   {"val_accuracy", e.val_accuracy}});
  j["training_log"] = std::move(log);
  return j;
}

inline std::vector<PredictionRecord> predict_cnn(const cnn::CnnModel& m, const EmbeddingTable& table,
                                                 std::span<const TokenizedRecord> corpus) {
  if (table.dimension() != m.arch.embedding_dim)
    throw Error("embedding dimension " + std::to_string(table.dimension()) +
                " does not match the model's " + std::to_string(m.arch.embedding_dim));
  std::vector<PredictionRecord> out;
  for (const auto& r : corpus) {
    PredictionRecord p;
    p.id = r.record.id;
    p.proba = cnn::predict_distribution(m, cnn::encode_sequence(r.tweet.tokens, table, m.arch.max_length));
    p.pred = p.proba->argmax();
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON file helpers.

inline nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": invalid JSON: " + e.what());
  }
}

inline void save_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

}  // namespace tweetpol::pipeline
