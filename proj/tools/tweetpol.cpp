#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tweetpol/tweetpol.hpp"

namespace fs = std::filesystem;
using namespace tweetpol;
using pipeline::PipelineConfig;

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

std::shared_ptr<const EmbeddingTable> load_table(const fs::path& p) {
  if (p.empty()) throw Error("an embedding file is required (--embeddings or config key \"embeddings\")");
  return std::make_shared<const EmbeddingTable>(load_embeddings(p));
}

std::vector<TokenizedRecord> load_tokenized(const fs::path& p) { return preprocess_corpus(load_corpus(p)); }

// Options shared by the training commands. Values given on the command line
// override the config file.
struct Shared {
  std::string config;
  std::string embeddings, pos, neg, negators, stopwords;
  double marker_threshold = 0, near_threshold = 0, C = 0;
  std::size_t min_count = 0;
  std::uint64_t seed = 0;
  std::vector<CLI::Option*> opts;
  CLI::Option *o_emb = nullptr, *o_pos = nullptr, *o_neg = nullptr, *o_negators = nullptr,
              *o_stop = nullptr, *o_thr = nullptr, *o_near = nullptr, *o_C = nullptr,
              *o_min = nullptr, *o_seed = nullptr;

  void add(CLI::App* app, bool lexicon_flags) {
    app->add_option("--config", config, "key=value config file (flags win)")->check(CLI::ExistingFile);
    o_emb = app->add_option("--embeddings", embeddings, "text embedding file");
    o_seed = app->add_option("--seed", seed, "random seed (default 42)");
    if (lexicon_flags) {
      o_pos = app->add_option("--pos", pos, "positive lexicon file");
      o_neg = app->add_option("--neg", neg, "negative lexicon file");
      o_negators = app->add_option("--negators", negators, "negator list file");
      o_stop = app->add_option("--stopwords", stopwords, "stopword list file");
      o_thr = app->add_option("--marker-threshold", marker_threshold, "marker share threshold");
      o_min = app->add_option("--min-count", min_count, "marker minimum tweet count");
      o_near = app->add_option("--near-threshold", near_threshold, "cosine threshold for centroid counts");
      o_C = app->add_option("--C", C, "SVM penalty");
    }
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg = config.empty() ? PipelineConfig{} : pipeline::load_config(config);
    auto given = [](CLI::Option* o) { return o && o->count() > 0; };
    if (given(o_emb)) cfg.embeddings = embeddings;
    if (given(o_seed)) cfg.seed = seed;
    if (given(o_pos)) cfg.positive_lexicon = pos;
    if (given(o_neg)) cfg.negative_lexicon = neg;
    if (given(o_negators)) cfg.negators = negators;
    if (given(o_stop)) cfg.stopwords = stopwords;
    if (given(o_thr)) cfg.marker_threshold = marker_threshold;
    if (given(o_min)) cfg.marker_min_count = min_count;
    if (given(o_near)) cfg.near_threshold = near_threshold;
    if (given(o_C)) cfg.svm_C = C;
    cfg.validate();
    return cfg;
  }
};

Lexicon lexicon_from(const PipelineConfig& cfg) {
  Lexicon lex;
  if (!cfg.positive_lexicon.empty()) lex.positive = load_word_list(cfg.positive_lexicon);
  if (!cfg.negative_lexicon.empty()) lex.negative = load_word_list(cfg.negative_lexicon);
  return lex;
}

pipeline::SvmTrainingInputs training_inputs(const PipelineConfig& cfg, const std::string& polarity_path,
                                            const std::string& markers_path) {
  pipeline::SvmTrainingInputs in;
  in.lexicon = lexicon_from(cfg);
  in.negators = pipeline::word_list_or(cfg.negators, default_negators());
  in.stopwords = pipeline::word_list_or(cfg.stopwords, default_stopwords());
  if (!polarity_path.empty()) in.polarity = polarity_model_from_json(pipeline::load_json(polarity_path));
  if (!markers_path.empty()) in.markers = markers_from_json(pipeline::load_json(markers_path));
  return in;
}

void write_matrix(std::ostream& out, const Matrix& X, std::span<const std::size_t> labels) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    out << labels[i];
    for (double v : X.row(i)) out << ' ' << v;
    out << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spanish tweet polarity: resources, SVM and CNN classifiers, hybrid and evaluation"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "normalize and tokenize a corpus");
  std::string pre_in, pre_out;
  pre->add_option("--corpus", pre_in, "input corpus (.jsonl or .tsv)")->required()->check(CLI::ExistingFile);
  pre->add_option("--out", pre_out, "output JSONL")->required();

  // split
  auto* split = app.add_subcommand("split", "stratified train/dev split");
  std::string split_in, split_train, split_dev;
  SplitSpec split_spec;
  split->add_option("--corpus", split_in, "input corpus")->required()->check(CLI::ExistingFile);
  split->add_option("--fraction", split_spec.train_fraction, "training share per class")->capture_default_str();
  split->add_option("--seed", split_spec.seed, "shuffle seed")->capture_default_str();
  split->add_option("--train-out", split_train, "training side (default CORPUS.train.jsonl)");
  split->add_option("--dev-out", split_dev, "development side (default CORPUS.dev.jsonl)");

  // build-lexicon
  auto* lexcmd = app.add_subcommand("build-lexicon", "intersect source lexicons and expand inflections");
  std::vector<std::string> lex_pos(3), lex_neg(3);
  std::string lex_infl, lex_out;
  for (int i = 0; i < 3; ++i) {
    lexcmd->add_option("--pos" + std::to_string(i + 1), lex_pos[i], "positive list " + std::to_string(i + 1))
        ->check(CLI::ExistingFile);
    lexcmd->add_option("--neg" + std::to_string(i + 1), lex_neg[i], "negative list " + std::to_string(i + 1))
        ->check(CLI::ExistingFile);
  }
  lexcmd->add_option("--inflections", lex_infl, "lemma<TAB>forms file")->check(CLI::ExistingFile);
  lexcmd->add_option("--out", lex_out, "output prefix; writes PREFIX.pos and PREFIX.neg")->required();

  // markers
  auto* mk = app.add_subcommand("markers", "compute category marker words");
  std::string mk_in, mk_out;
  double mk_thr = 0.75;
  std::size_t mk_min = 3;
  mk->add_option("--corpus", mk_in, "training corpus")->required()->check(CLI::ExistingFile);
  mk->add_option("--threshold", mk_thr, "minimum class share")->capture_default_str();
  mk->add_option("--min-count", mk_min, "minimum number of tweets")->capture_default_str();
  mk->add_option("--out", mk_out, "output JSON")->required();

  // train-polarity
  auto* tp = app.add_subcommand("train-polarity", "fit the word-polarity regressor");
  Shared tp_sh;
  tp_sh.add(tp, true);
  std::string tp_out;
  double tp_eps = 0.1;
  tp->add_option("--epsilon", tp_eps, "SVR epsilon")->capture_default_str();
  tp->add_option("--out", tp_out, "output JSON")->required();

  // extract-features
  auto* ef = app.add_subcommand("extract-features", "write numeric feature rows");
  Shared ef_sh;
  ef_sh.add(ef, true);
  std::string ef_task = "1", ef_in, ef_model, ef_out, ef_train, ef_polarity, ef_markers;
  ef->add_option("--task", ef_task, "1, 2-svm1 or 2-svm2")->capture_default_str();
  ef->add_option("--corpus", ef_in, "corpus to featurize")->required()->check(CLI::ExistingFile);
  ef->add_option("--model", ef_model, "take resources from a trained SVM model")->check(CLI::ExistingFile);
  ef->add_option("--train", ef_train, "derive resources from this corpus (default --corpus)")
      ->check(CLI::ExistingFile);
  ef->add_option("--polarity", ef_polarity, "word-polarity model JSON")->check(CLI::ExistingFile);
  ef->add_option("--markers", ef_markers, "markers JSON")->check(CLI::ExistingFile);
  ef->add_option("--out", ef_out, "output matrix")->required();

  // train-svm
  auto* ts = app.add_subcommand("train-svm", "train the one-vs-one SVM with probabilities");
  Shared ts_sh;
  ts_sh.add(ts, true);
  std::string ts_task = "1", ts_in, ts_out, ts_polarity, ts_markers;
  ts->add_option("--task", ts_task, "1, 2-svm1 or 2-svm2")->capture_default_str();
  ts->add_option("--corpus", ts_in, "training corpus")->required()->check(CLI::ExistingFile);
  ts->add_option("--polarity", ts_polarity, "word-polarity model JSON")->check(CLI::ExistingFile);
  ts->add_option("--markers", ts_markers, "markers JSON")->check(CLI::ExistingFile);
  ts->add_option("--out", ts_out, "output model JSON")->required();

  // train-cnn
  auto* tc = app.add_subcommand("train-cnn", "train the convolutional classifier");
  Shared tc_sh;
  tc_sh.add(tc, false);
  std::string tc_in, tc_val, tc_out;
  std::size_t tc_len = 0, tc_epochs = 0, tc_patience = 0, tc_batch = 0;
  tc->add_option("--corpus", tc_in, "training corpus")->required()->check(CLI::ExistingFile);
  tc->add_option("--val", tc_val, "validation corpus (default: split off --corpus)")->check(CLI::ExistingFile);
  auto* o_len = tc->add_option("--max-length", tc_len, "padded sequence length");
  auto* o_epochs = tc->add_option("--epochs", tc_epochs, "maximum epochs");
  auto* o_pat = tc->add_option("--patience", tc_patience, "early-stopping patience");
  auto* o_batch = tc->add_option("--batch-size", tc_batch, "mini-batch size");
  tc->add_option("--out", tc_out, "output model JSON")->required();

  // predict
  auto* pr = app.add_subcommand("predict", "class distributions from an SVM or CNN model");
  std::string pr_model, pr_in, pr_emb, pr_out;
  pr->add_option("--model", pr_model, "model JSON")->required()->check(CLI::ExistingFile);
  pr->add_option("--corpus", pr_in, "corpus to label")->required()->check(CLI::ExistingFile);
  pr->add_option("--embeddings", pr_emb, "text embedding file")->required()->check(CLI::ExistingFile);
  pr->add_option("--out", pr_out, "output predictions JSONL")->required();

  // hybrid-predict
  auto* hy = app.add_subcommand("hybrid-predict", "average SVM and CNN distributions");
  std::string hy_svm, hy_cnn, hy_out;
  hy->add_option("--svm-proba", hy_svm, "SVM predictions JSONL")->required()->check(CLI::ExistingFile);
  hy->add_option("--cnn-proba", hy_cnn, "CNN predictions JSONL")->required()->check(CLI::ExistingFile);
  hy->add_option("--out", hy_out, "output predictions JSONL")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "accuracy, per-class F1, macro-F1 and confusion matrix");
  std::string ev_gold, ev_pred, ev_report;
  ev->add_option("--gold", ev_gold, "gold corpus")->required()->check(CLI::ExistingFile);
  ev->add_option("--pred", ev_pred, "predictions JSONL")->required()->check(CLI::ExistingFile);
  ev->add_option("--report", ev_report, "also write the report as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pre) {
      auto corpus = load_corpus(pre_in);
      auto out = open_out(pre_out);
      for (const auto& r : corpus.records) {
        auto t = preprocess_tweet(r.text);
        auto j = record_to_json(r);
        j["tokens"] = t.tokens;
        j["had_char_repetition"] = t.had_char_repetition;
        j["had_all_caps_word"] = t.had_all_caps_word;
        out << j.dump() << '\n';
      }
    } else if (*split) {
      auto corpus = load_corpus(split_in);
      auto [train, dev] = stratified_split(corpus, split_spec);
      fs::path base = fs::path(split_in).replace_extension();
      fs::path tr = split_train.empty() ? fs::path(base.string() + ".train.jsonl") : fs::path(split_train);
      fs::path dv = split_dev.empty() ? fs::path(base.string() + ".dev.jsonl") : fs::path(split_dev);
      save_corpus(tr, train, format_from_path(tr));
      save_corpus(dv, dev, format_from_path(dv));
      std::cout << "train " << train.size() << "  dev " << dev.size() << '\n';
    } else if (*lexcmd) {
      std::vector<Lexicon> sources;
      for (int i = 0; i < 3; ++i) {
        if (lex_pos[i].empty() != lex_neg[i].empty())
          throw Error("--pos" + std::to_string(i + 1) + " and --neg" + std::to_string(i + 1) +
                      " must be given together");
        if (!lex_pos[i].empty()) sources.push_back({load_word_list(lex_pos[i]), load_word_list(lex_neg[i])});
      }
      if (sources.empty()) throw Error("build-lexicon needs at least one --posN/--negN pair");
      Lexicon lex = intersect_lexicons(sources);
      if (!lex_infl.empty()) lex = expand_with_inflections(lex, load_inflections(lex_infl));
      save_word_list(lex_out + ".pos", lex.positive);
      save_word_list(lex_out + ".neg", lex.negative);
      std::cout << "positive " << lex.positive.size() << "  negative " << lex.negative.size() << '\n';
    } else if (*mk) {
      auto corpus = load_tokenized(mk_in);
      auto m = compute_markers(corpus, mk_thr, mk_min);
      pipeline::save_json(mk_out, to_json(m));
      for (auto p : kAllPolarities) std::cout << to_string(p) << ' ' << m.words[index_of(p)].size() << "  ";
      std::cout << '\n';
    } else if (*tp) {
      auto cfg = tp_sh.resolve();
      auto table = load_table(cfg.embeddings);
      auto sc = default_polarity_svr_config();
      sc.epsilon = tp_eps;
      sc.seed = cfg.seed;
      if (tp_sh.o_C->count()) sc.C = cfg.svm_C;
      auto model = train_polarity_predictor(lexicon_from(cfg), *table, sc);
      auto j = to_json(model);
      j["seed"] = cfg.seed;
      pipeline::save_json(tp_out, j);
    } else if (*ef) {
      auto cfg = ef_sh.resolve();
      auto table = load_table(cfg.embeddings);
      auto corpus = load_tokenized(ef_in);
      pipeline::SvmBundle b;
      if (!ef_model.empty()) {
        b = pipeline::svm_bundle_from_json(pipeline::load_json(ef_model));
        if (pipeline::to_string(b.task) != ef_task)
          throw Error("--task " + ef_task + " does not match the model's task " + pipeline::to_string(b.task));
      } else {
        auto train = ef_train.empty() ? corpus : load_tokenized(ef_train);
        b = pipeline::prepare_svm_bundle(pipeline::parse_task(ef_task), train, *table,
                                         training_inputs(cfg, ef_polarity, ef_markers), cfg);
      }
      auto X = pipeline::bundle_features(b, table, corpus);
      auto out = open_out(ef_out);
      write_matrix(out, X, pipeline::label_indices(corpus));
    } else if (*ts) {
      auto cfg = ts_sh.resolve();
      auto table = load_table(cfg.embeddings);
      auto corpus = load_tokenized(ts_in);
      auto b = pipeline::train_svm_bundle(pipeline::parse_task(ts_task), corpus, table,
                                          training_inputs(cfg, ts_polarity, ts_markers), cfg);
      pipeline::save_json(ts_out, pipeline::to_json(b));
      std::cout << "trained " << b.ovo.trained_pairs() << " pair models on " << corpus.size() << " tweets\n";
    } else if (*tc) {
      auto cfg = tc_sh.resolve();
      if (o_len->count()) cfg.cnn_max_length = tc_len;
      if (o_epochs->count()) cfg.cnn_max_epochs = tc_epochs;
      if (o_pat->count()) cfg.cnn_patience = tc_patience;
      if (o_batch->count()) cfg.cnn_batch_size = tc_batch;
      cfg.validate();
      auto table = load_table(cfg.embeddings);
      auto corpus = load_corpus(tc_in);
      LabeledCorpus train, val;
      if (tc_val.empty()) {
        std::tie(train, val) = stratified_split(corpus, cfg.split);
      } else {
        train = std::move(corpus);
        val = load_corpus(tc_val);
      }
      auto run = pipeline::train_cnn(preprocess_corpus(train), preprocess_corpus(val), *table, cfg);
      pipeline::save_json(tc_out, pipeline::to_json(run));
      std::cerr << "best epoch " << run.result.best_epoch << " of " << run.result.log.size() << '\n';
    } else if (*pr) {
      auto j = pipeline::load_json(pr_model);
      auto table = load_table(pr_emb);
      auto corpus = load_tokenized(pr_in);
      std::vector<PredictionRecord> preds;
      std::string kind = j.value("kind", "");
      if (kind == "svm")
        preds = pipeline::predict_svm(pipeline::svm_bundle_from_json(j), table, corpus);
      else if (kind == "cnn")
        preds = pipeline::predict_cnn(cnn::cnn_from_json(j), *table, corpus);
      else
        throw Error(pr_model + ": unknown model kind \"" + kind + "\"");
      auto out = open_out(pr_out);
      write_predictions(out, preds);
    } else if (*hy) {
      auto s = load_predictions(hy_svm);
      auto c = load_predictions(hy_cnn);
      auto out = open_out(hy_out);
      write_predictions(out, hybrid_combine(s, c));
    } else if (*ev) {
      auto gold = load_corpus(ev_gold);
      auto preds = load_predictions(ev_pred);
      auto rep = evaluate_run(preds, gold);
      std::cout << format_report(rep);
      if (!ev_report.empty()) pipeline::save_json(ev_report, to_json(rep));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
