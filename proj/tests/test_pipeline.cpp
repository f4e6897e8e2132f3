#include <gtest/gtest.h>

#include <memory>
#include <sstream>

#include "tweetpol/pipeline.hpp"
#include "tweetpol/synthetic.hpp"

using namespace tweetpol;
using namespace tweetpol::pipeline;

TEST(Config, ParsesKeyValues) {
  std::istringstream in(R"(# comment
svm.C = 2.5
  marker.threshold=0.8
cnn.max_length = 20

seed = 7
split.fraction = 0.9
cnn.learning_rate = 1e-3
)");
  PipelineConfig cfg;
  apply_config(cfg, read_key_values(in));
  EXPECT_EQ(cfg.svm_C, 2.5);
  EXPECT_EQ(cfg.marker_threshold, 0.8);
  EXPECT_EQ(cfg.cnn_max_length, 20u);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.split.train_fraction, 0.9);
  EXPECT_EQ(cfg.cnn_learning_rate, 1e-3);
  EXPECT_EQ(cfg.marker_min_count, 3u);
  EXPECT_NO_THROW(cfg.validate());
  auto tc = cnn_train_config(cfg);
  EXPECT_EQ(tc.adam.learning_rate, 1e-3);
  EXPECT_EQ(tc.seed, 7u);
}

TEST(Config, Errors) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    PipelineConfig cfg;
    apply_config(cfg, read_key_values(in));
    cfg.validate();
  };
  EXPECT_THROW(parse("svm.C\n"), ParseError);
  EXPECT_THROW(parse("seed = 1\nseed = 2\n"), ParseError);
  EXPECT_THROW(parse("svm.c = 1\n"), Error);
  EXPECT_THROW(parse("svm.C = abc\n"), Error);
  EXPECT_THROW(parse("svm.C = 1x\n"), Error);
  EXPECT_THROW(parse("svm.C = -1\n"), Error);
  EXPECT_THROW(parse("marker.threshold = 1.5\n"), Error);
  EXPECT_THROW(parse("split.fraction = 1\n"), Error);
  EXPECT_THROW(parse("cnn.patience = 0\n"), Error);
  EXPECT_THROW(parse("embeddings = /no/such/file.txt\n"), Error);
  EXPECT_THROW(load_config("/no/such/config"), Error);
}

TEST(Config, Tasks) {
  for (auto t : {SvmTask::Task1, SvmTask::Task2Svm1, SvmTask::Task2Svm2}) EXPECT_EQ(parse_task(to_string(t)), t);
  EXPECT_THROW(parse_task("3"), Error);
}

namespace {

struct Fixture {
  std::shared_ptr<EmbeddingTable> table;
  std::vector<TokenizedRecord> train, test;
  Lexicon lexicon;
};

Fixture fixture(std::size_t tweets, bool aspects = false) {
  synthetic::Spec spec;
  spec.tweets = tweets;
  auto d = synthetic::generate(spec);
  Fixture f;
  f.table = std::make_shared<EmbeddingTable>(d.table);
  f.lexicon = d.lexicon;
  auto all = preprocess_corpus(d.corpus);
  if (aspects) {
    const char* names[] = {"Equipo-A", "Equipo-B", "Jugador-C"};
    for (std::size_t i = 0; i < all.size(); ++i) all[i].record.aspect = names[i % 3];
  }
  std::size_t cut = tweets * 4 / 5;
  f.train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(cut));
  f.test.assign(all.begin() + static_cast<std::ptrdiff_t>(cut), all.end());
  return f;
}

double accuracy_of(const std::vector<PredictionRecord>& preds, const std::vector<TokenizedRecord>& gold) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hit += preds[i].pred == gold[i].record.label;
  return static_cast<double>(hit) / static_cast<double>(preds.size());
}

}  // namespace

TEST(SvmBundle, Task1TrainsAndRoundTrips) {
  auto f = fixture(400);
  PipelineConfig cfg;
  SvmTrainingInputs in;
  in.lexicon = f.lexicon;
  auto b = train_svm_bundle(SvmTask::Task1, f.train, f.table, in, cfg);
  EXPECT_EQ(b.ovo.num_features, Task1Layout{f.table->dimension()}.total());
  EXPECT_EQ(b.bow_vocabulary.size(), 5u);
  auto preds = predict_svm(b, f.table, f.test);
  EXPECT_GE(accuracy_of(preds, f.test), 0.85);
  for (const auto& p : preds) ASSERT_TRUE(p.proba->is_valid(1e-9));

  auto j = to_json(b);
  auto back = svm_bundle_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(to_json(back).dump(), j.dump());
  auto again = predict_svm(back, f.table, f.test);
  for (std::size_t i = 0; i < preds.size(); ++i)
    ASSERT_EQ(again[i].proba->probabilities, preds[i].proba->probabilities);

  // Same seed, same bytes.
  EXPECT_EQ(to_json(train_svm_bundle(SvmTask::Task1, f.train, f.table, in, cfg)).dump(), j.dump());

  auto other = std::make_shared<EmbeddingTable>(f.table->dimension() + 1);
  other->insert("x", std::vector<double>(f.table->dimension() + 1, 1.0));
  EXPECT_THROW(predict_svm(b, other, f.test), Error);
}

TEST(SvmBundle, Task2Variants) {
  auto f = fixture(300, true);
  PipelineConfig cfg;
  for (auto task : {SvmTask::Task2Svm1, SvmTask::Task2Svm2}) {
    auto b = train_svm_bundle(task, f.train, f.table, {}, cfg);
    EXPECT_EQ(b.aspects.aspects.size(), 3u);
    std::size_t expect_dim = task == SvmTask::Task2Svm2 ? f.table->dimension() + 4
                                                        : b.vocabulary.size() + 2 + 4 + 4;
    EXPECT_EQ(b.ovo.num_features, expect_dim);
    auto preds = predict_svm(b, f.table, f.test);
    EXPECT_GE(accuracy_of(preds, f.test), 0.8) << to_string(task);
    auto back = svm_bundle_from_json(nlohmann::json::parse(to_json(b).dump()));
    EXPECT_EQ(to_json(back).dump(), to_json(b).dump());
  }
}

TEST(SvmBundle, RejectsOtherKinds) {
  EXPECT_THROW(svm_bundle_from_json(nlohmann::json{{"kind", "cnn"}}), Error);
}

TEST(CnnRun, TrainPredictAndSerialize) {
  auto f = fixture(300);
  PipelineConfig cfg;
  cfg.cnn_max_length = 12;
  cfg.cnn_max_epochs = 30;
  cfg.cnn_learning_rate = 1e-3;
  std::span<const TokenizedRecord> train(f.train);
  auto run = train_cnn(train.subspan(0, 200), train.subspan(200), *f.table, cfg);
  EXPECT_GE(run.result.best_epoch, 1u);
  auto j = to_json(run);
  EXPECT_EQ(j["training_log"].size(), run.result.log.size());
  auto back = cnn::cnn_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back, run.result.model);
  auto preds = predict_cnn(back, *f.table, f.test);
  EXPECT_GE(accuracy_of(preds, f.test), 0.85);
  EXPECT_EQ(to_json(train_cnn(train.subspan(0, 200), train.subspan(200), *f.table, cfg)).dump(), j.dump());
}
