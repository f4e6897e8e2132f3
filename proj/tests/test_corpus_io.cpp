#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <string>

#include "tweetpol/corpus_io.hpp"

using namespace tweetpol;

namespace {

std::string data(const char* name) { return std::string(TWEETPOL_TEST_DATA) + "/" + name; }

template <class F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

LabeledCorpus make_corpus(std::size_t p, std::size_t n, std::size_t neu, std::size_t none) {
  LabeledCorpus c;
  std::size_t id = 0;
  auto add = [&](Polarity l, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) c.records.push_back({"r" + std::to_string(id++), "texto", l, ""});
  };
  add(Polarity::P, p);
  add(Polarity::N, n);
  add(Polarity::NEU, neu);
  add(Polarity::NONE, none);
  return c;
}

}  // namespace

TEST(LoadCorpus, Tsv) {
  auto c = load_corpus(data("small.tsv"));
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c.records[0].id, "t1");
  EXPECT_EQ(c.records[0].label, Polarity::P);
  EXPECT_EQ(c.records[0].text, "Qué día tan bueno");
  EXPECT_EQ(c.records[3].label, Polarity::NONE);
}

TEST(LoadCorpus, JsonlSkipsBlankLinesAndReadsAspect) {
  auto c = load_corpus(data("small.jsonl"));
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c.records[2].aspect, "Futbolista-Messi");
  EXPECT_EQ(c.records[2].label, Polarity::NEU);
  EXPECT_TRUE(c.records[0].aspect.empty());
}

TEST(LoadCorpus, EmptyFile) { EXPECT_EQ(load_corpus(data("empty.jsonl")).size(), 0u); }

TEST(LoadCorpus, UnknownLabelNamesLineAndValue) {
  auto msg = error_of([] { load_corpus(data("bad_label.jsonl")); });
  EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("POS"), std::string::npos) << msg;
  try {
    load_corpus(data("bad_label.jsonl"));
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadCorpus, DuplicateIdAndEmptyText) {
  auto msg = error_of([] { load_corpus(data("dup_id.jsonl")); });
  EXPECT_NE(msg.find("duplicate id"), std::string::npos) << msg;
  msg = error_of([] { load_corpus(data("empty_text.tsv")); });
  EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
  EXPECT_THROW(load_corpus(data("does-not-exist.jsonl")), Error);
}

TEST(LoadCorpus, Table1Sizes) {
  auto c = make_corpus(2782, 2295, 721, 1346);
  std::stringstream ss;
  write_corpus(ss, c, CorpusFormat::Tsv);
  auto back = read_corpus(ss, CorpusFormat::Tsv);
  EXPECT_EQ(back.size(), 7144u);
  auto d = class_distribution(back);
  EXPECT_EQ(d[0].count, 2782u);
  EXPECT_EQ(d[1].count, 2295u);
  EXPECT_EQ(d[2].count, 721u);
  EXPECT_EQ(d[3].count, 1346u);
  EXPECT_NEAR(d[0].fraction, 0.39, 0.005);
  EXPECT_NEAR(d[1].fraction, 0.32, 0.005);
  EXPECT_NEAR(d[2].fraction, 0.10, 0.005);
  EXPECT_NEAR(d[3].fraction, 0.19, 0.005);
}

TEST(ClassDistribution, SmallCases) {
  auto d = class_distribution(make_corpus(3, 1, 0, 0));
  EXPECT_EQ(d[0].count, 3u);
  EXPECT_DOUBLE_EQ(d[0].fraction, 0.75);
  EXPECT_DOUBLE_EQ(d[1].fraction, 0.25);
  auto e = class_distribution(LabeledCorpus{});
  for (const auto& s : e) {
    EXPECT_EQ(s.count, 0u);
    EXPECT_EQ(s.fraction, 0.0);
  }
}

TEST(RoundTrip, JsonlAndTsvPreserveContent) {
  LabeledCorpus c;
  c.records = {{"1", "tab\tinside? no: \"quotes\" y ñ", Polarity::P, "Equipo-Real"},
               {"2", "segunda línea", Polarity::NEU, ""}};
  std::stringstream js;
  write_corpus(js, c, CorpusFormat::Jsonl);
  auto back = read_corpus(js, CorpusFormat::Jsonl);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.records[i].id, c.records[i].id);
    EXPECT_EQ(back.records[i].text, c.records[i].text);
    EXPECT_EQ(back.records[i].label, c.records[i].label);
    EXPECT_EQ(back.records[i].aspect, c.records[i].aspect);
  }
  LabeledCorpus t;
  t.records = {{"a", "uno dos", Polarity::N, ""}, {"b", "tres", Polarity::NONE, ""}};
  std::stringstream ts;
  write_corpus(ts, t, CorpusFormat::Tsv);
  auto tb = read_corpus(ts, CorpusFormat::Tsv);
  ASSERT_EQ(tb.size(), 2u);
  EXPECT_EQ(tb.records[1].text, "tres");
  EXPECT_EQ(tb.records[0].label, Polarity::N);
}

TEST(StratifiedSplit, ExactDivision) {
  auto [train, dev] = stratified_split(make_corpus(100, 100, 0, 0), {0.85, 1});
  auto dt = class_distribution(train), dd = class_distribution(dev);
  EXPECT_EQ(dt[0].count, 85u);
  EXPECT_EQ(dt[1].count, 85u);
  EXPECT_EQ(dd[0].count, 15u);
  EXPECT_EQ(dd[1].count, 15u);
}

TEST(StratifiedSplit, SingletonGoesToTrain) {
  auto [train, dev] = stratified_split(make_corpus(10, 10, 1, 0), {0.85, 3});
  EXPECT_EQ(class_distribution(train)[2].count, 1u);
  EXPECT_EQ(class_distribution(dev)[2].count, 0u);
}

TEST(StratifiedSplit, Deterministic) {
  auto c = make_corpus(37, 21, 9, 13);
  auto a = stratified_split(c, {0.85, 7});
  auto b = stratified_split(c, {0.85, 7});
  std::stringstream s1, s2;
  write_corpus(s1, a.first, CorpusFormat::Jsonl);
  write_corpus(s1, a.second, CorpusFormat::Jsonl);
  write_corpus(s2, b.first, CorpusFormat::Jsonl);
  write_corpus(s2, b.second, CorpusFormat::Jsonl);
  EXPECT_EQ(s1.str(), s2.str());
  auto other = stratified_split(c, {0.85, 8});
  std::stringstream s3;
  write_corpus(s3, other.first, CorpusFormat::Jsonl);
  write_corpus(s3, other.second, CorpusFormat::Jsonl);
  EXPECT_NE(s1.str(), s3.str());
}

TEST(StratifiedSplit, Errors) {
  EXPECT_THROW(stratified_split(LabeledCorpus{}, {}), Error);
  EXPECT_THROW(stratified_split(make_corpus(2, 2, 0, 0), {1.0, 1}), Error);
  EXPECT_THROW(stratified_split(make_corpus(2, 2, 0, 0), {0.0, 1}), Error);
}

TEST(StratifiedSplitProperty, PartitionWithCeilCounts) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = 1 + rng() % 500;
    LabeledCorpus c;
    for (std::size_t i = 0; i < n; ++i)
      c.records.push_back({"id" + std::to_string(i), "t", polarity_from_index(rng() % 4), ""});
    double f = 0.05 + 0.9 * static_cast<double>(rng() % 1000) / 1000.0;
    auto [train, dev] = stratified_split(c, {f, rng()});
    ASSERT_EQ(train.size() + dev.size(), n);
    std::vector<std::string> ids;
    for (const auto& r : train.records) ids.push_back(r.id);
    for (const auto& r : dev.records) ids.push_back(r.id);
    std::sort(ids.begin(), ids.end());
    std::vector<std::string> want;
    for (const auto& r : c.records) want.push_back(r.id);
    std::sort(want.begin(), want.end());
    ASSERT_EQ(ids, want);
    auto all = class_distribution(c), tr = class_distribution(train);
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      auto expect = static_cast<std::size_t>(std::ceil(f * static_cast<double>(all[k].count) - 1e-9));
      ASSERT_EQ(tr[k].count, std::min(expect, all[k].count));
    }
    double s = 0;
    for (auto& x : all) s += x.fraction;
    ASSERT_NEAR(s, 1.0, 1e-9);
  }
}
