#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tweetpol/corpus_io.hpp"
#include "tweetpol/polarity.hpp"

namespace tweetpol {

inline constexpr double kDistributionTolerance = 1e-6;

// Class with the highest mean probability across the two models; ties go
// to the earlier class in (P, N, NEU, NONE) order.
inline Polarity hybrid_predict(const ClassDistribution& svm, const ClassDistribution& cnn) {
  if (!svm.is_valid(kDistributionTolerance) || !cnn.is_valid(kDistributionTolerance))
    throw Error("hybrid_predict: inputs must be probability distributions");
  ClassDistribution avg;
  for (std::size_t c = 0; c < kNumClasses; ++c)
    avg.probabilities[c] = (svm[c] + cnn[c]) / 2.0;
  return avg.argmax();
}

// Rows are gold classes, columns predicted classes.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& row : counts)
      for (auto v : row) n += v;
    return n;
  }
  std::size_t row_sum(std::size_t r) const {
    std::size_t n = 0;
    for (auto v : counts[r]) n += v;
    return n;
  }
  std::size_t column_sum(std::size_t c) const {
    std::size_t n = 0;
    for (const auto& row : counts) n += row[c];
    return n;
  }
  std::size_t trace() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < kNumClasses; ++i) n += counts[i][i];
    return n;
  }

  bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion_matrix(std::span<const Polarity> predictions,
                                        std::span<const Polarity> gold) {
  if (predictions.size() != gold.size())
    throw Error("confusion_matrix: " + std::to_string(predictions.size()) + " predictions for " +
                std::to_string(gold.size()) + " gold labels");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < gold.size(); ++i) ++m.counts[index_of(gold[i])][index_of(predictions[i])];
  return m;
}

inline double accuracy(const ConfusionMatrix& m) {
  if (m.total() == 0) throw Error("accuracy: empty confusion matrix");
  return static_cast<double>(m.trace()) / static_cast<double>(m.total());
}

struct Metrics {
  double accuracy = 0.0;
  std::array<double, kNumClasses> precision{};
  std::array<double, kNumClasses> recall{};
  std::array<double, kNumClasses> per_class_f1{};
  double macro_f1 = 0.0;
};

// Per-class precision, recall and F1 with 0/0 read as 0; macro-F1 is the
// unweighted mean over the four classes.
inline Metrics macro_f1(const ConfusionMatrix& m) {
  if (m.total() == 0) throw Error("macro_f1: empty confusion matrix");
  Metrics out;
  out.accuracy = accuracy(m);
  double sum = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    double tp = static_cast<double>(m.counts[c][c]);
    double col = static_cast<double>(m.column_sum(c));
    double row = static_cast<double>(m.row_sum(c));
    double p = col > 0 ? tp / col : 0.0;
    double r = row > 0 ? tp / row : 0.0;
    out.precision[c] = p;
    out.recall[c] = r;
    out.per_class_f1[c] = (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0;
    sum += out.per_class_f1[c];
  }
  out.macro_f1 = sum / static_cast<double>(kNumClasses);
  return out;
}

// ---------------------------------------------------------------------------
// Prediction files: JSONL {"id", "pred", optional "proba": [4 reals]}.

struct PredictionRecord {
  std::string id;
  Polarity pred = Polarity::NONE;
  std::optional<ClassDistribution> proba;
};

inline nlohmann::json to_json(const PredictionRecord& p) {
  nlohmann::json j{{"id", p.id}, {"pred", std::string(to_string(p.pred))}};
  if (p.proba) j["proba"] = p.proba->probabilities;
  return j;
}

inline std::vector<PredictionRecord> read_predictions(std::istream& in,
                                                      const std::string& source = "<predictions>") {
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source, lineno, std::string("invalid JSON: ") + e.what());
    }
    PredictionRecord p;
    if (!j.contains("id") || !j["id"].is_string()) throw ParseError(source, lineno, "missing \"id\"");
    p.id = j["id"].get<std::string>();
    if (j.contains("proba")) {
      auto v = j["proba"].get<std::vector<double>>();
      if (v.size() != kNumClasses) throw ParseError(source, lineno, "\"proba\" must hold 4 values");
      ClassDistribution d;
      std::copy(v.begin(), v.end(), d.probabilities.begin());
      if (!d.is_valid(kDistributionTolerance))
        throw ParseError(source, lineno, "\"proba\" is not a probability distribution");
      p.proba = d;
    }
    if (j.contains("pred")) {
      auto lbl = parse_polarity(j["pred"].get<std::string>());
      if (!lbl) throw ParseError(source, lineno, "unknown label in \"pred\"");
      p.pred = *lbl;
    } else if (p.proba) {
      p.pred = p.proba->argmax();
    } else {
      throw ParseError(source, lineno, "record has neither \"pred\" nor \"proba\"");
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open predictions file: " + path.string());
  return read_predictions(in, path.string());
}

inline void write_predictions(std::ostream& out, std::span<const PredictionRecord> preds) {
  for (const auto& p : preds) out << to_json(p).dump() << '\n';
}

// Joins two probability files by id and applies hybrid_predict.
inline std::vector<PredictionRecord> hybrid_combine(std::span<const PredictionRecord> svm,
                                                    std::span<const PredictionRecord> cnn) {
  std::unordered_map<std::string, const PredictionRecord*> by_id;
  for (const auto& p : cnn) by_id[p.id] = &p;
  if (svm.size() != cnn.size())
    throw Error("hybrid-predict: files hold " + std::to_string(svm.size()) + " and " +
                std::to_string(cnn.size()) + " records");
  std::vector<PredictionRecord> out;
  for (const auto& s : svm) {
    auto it = by_id.find(s.id);
    if (it == by_id.end()) throw Error("hybrid-predict: id \"" + s.id + "\" missing from CNN file");
    if (!s.proba || !it->second->proba)
      throw Error("hybrid-predict: id \"" + s.id + "\" has no probability vector");
    PredictionRecord r;
    r.id = s.id;
    r.pred = hybrid_predict(*s.proba, *it->second->proba);
    ClassDistribution avg;
    for (std::size_t c = 0; c < kNumClasses; ++c)
      avg.probabilities[c] = ((*s.proba)[c] + (*it->second->proba)[c]) / 2.0;
    r.proba = avg;
    out.push_back(std::move(r));
  }
  return out;
}

struct EvaluationReport {
  ConfusionMatrix confusion;
  Metrics metrics;
};

// Joins predictions to gold records by id. Every gold id must have exactly
// one prediction and no prediction may name an unknown id.
inline EvaluationReport evaluate_run(std::span<const PredictionRecord> predictions,
                                     const LabeledCorpus& gold) {
  std::unordered_map<std::string, Polarity> pred_by_id;
  std::vector<std::string> duplicate;
  for (const auto& p : predictions)
    if (!pred_by_id.emplace(p.id, p.pred).second) duplicate.push_back(p.id);
  std::vector<std::string> missing, extra;
  std::vector<Polarity> preds, labels;
  std::unordered_map<std::string, bool> gold_ids;
  for (const auto& r : gold.records) {
    gold_ids[r.id] = true;
    auto it = pred_by_id.find(r.id);
    if (it == pred_by_id.end()) {
      missing.push_back(r.id);
      continue;
    }
    preds.push_back(it->second);
    labels.push_back(r.label);
  }
  for (const auto& p : predictions)
    if (!gold_ids.count(p.id)) extra.push_back(p.id);
  if (!missing.empty() || !extra.empty() || !duplicate.empty()) {
    std::ostringstream msg;
    msg << "predictions do not align with gold";
    auto list = [&](const char* what, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      msg << "; " << what << ":";
      for (std::size_t i = 0; i < ids.size() && i < 20; ++i) msg << ' ' << ids[i];
      if (ids.size() > 20) msg << " ... (" << ids.size() << " total)";
    };
    list("missing ids", missing);
    list("unknown ids", extra);
    list("duplicate ids", duplicate);
    throw Error(msg.str());
  }
  EvaluationReport rep;
  rep.confusion = confusion_matrix(preds, labels);
  rep.metrics = macro_f1(rep.confusion);
  return rep;
}

inline nlohmann::json to_json(const EvaluationReport& r) {
  nlohmann::json j;
  j["accuracy"] = r.metrics.accuracy;
  j["macro_f1"] = r.metrics.macro_f1;
  nlohmann::json per;
  for (auto p : kAllPolarities) {
    auto c = index_of(p);
    per[std::string(to_string(p))] = {{"precision", r.metrics.precision[c]},
                                      {"recall", r.metrics.recall[c]},
                                      {"f1", r.metrics.per_class_f1[c]}};
  }
  j["per_class"] = per;
  j["class_order"] = {"P", "N", "NEU", "NONE"};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.confusion.counts) rows.push_back(row);
  j["confusion_matrix"] = rows;
  return j;
}

// Percentages with one decimal, confusion matrix rows = gold.
inline std::string format_report(const EvaluationReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  out << "M-F1      " << 100.0 * r.metrics.macro_f1 << '\n';
  out << "Accuracy  " << 100.0 * r.metrics.accuracy << '\n';
  out << "F1 per class:";
  for (auto p : kAllPolarities) out << "  " << to_string(p) << ' ' << 100.0 * r.metrics.per_class_f1[index_of(p)];
  out << "\n\n" << std::setw(6) << "";
  for (auto p : kAllPolarities) out << std::setw(7) << to_string(p);
  out << '\n';
  for (auto g : kAllPolarities) {
    out << std::setw(6) << to_string(g);
    for (auto p : kAllPolarities) out << std::setw(7) << r.confusion.counts[index_of(g)][index_of(p)];
    out << '\n';
  }
  return out.str();
}

}  // namespace tweetpol
