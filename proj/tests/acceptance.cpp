// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "tweetpol/tweetpol.hpp"

using namespace tweetpol;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& s) {
    if (pass) detail += (detail.empty() ? "" : "; ") + s;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome metric_reproduction() {
  Outcome o;
  ConfusionMatrix m;
  m.counts = {{{443, 88, 8, 37}, {85, 414, 5, 20}, {47, 89, 4, 11}, {89, 78, 4, 167}}};
  auto r = macro_f1(m);
  double acc = 100 * r.accuracy, mf1 = 100 * r.macro_f1;
  o.require(std::abs(acc - 64.7) <= 0.05, "accuracy " + fmt("%.4f", acc));
  o.require(std::abs(mf1 - 50.9) <= 0.05, "M-F1 " + fmt("%.4f", mf1));
  const double published[4] = {71.5, 69.4, 4.7, 58.3};
  for (std::size_t c = 0; c < 4; ++c)
    o.require(std::abs(100 * r.per_class_f1[c] - published[c]) <= 0.1,
              "F1[" + std::to_string(c) + "] " + fmt("%.4f", 100 * r.per_class_f1[c]));
  o.note("acc " + fmt("%.3f", acc) + ", M-F1 " + fmt("%.3f", mf1));
  return o;
}

Outcome feature_shape() {
  Outcome o;
  const std::size_t d = 300;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  auto table = std::make_shared<EmbeddingTable>(d);
  for (int i = 0; i < 60; ++i) {
    std::vector<double> v(d);
    for (double& x : v) x = g(rng);
    table->insert("w" + std::to_string(i), v);
  }
  Lexicon lex{{"w0", "w1", "w2", "w3", "w5"}, {"w6", "w7", "w8", "w9"}};
  auto polarity = train_polarity_predictor(lex, *table);
  auto corpus = fixture::random_corpus(1000, rng, 70);
  auto res = make_feature_resources(table, lex, compute_markers(corpus, 0.75, 3), polarity,
                                    top_k_relevant_words(corpus, default_stopwords()));
  Task1Layout L{d};
  std::size_t bad_dim = 0, bad_hot = 0;
  for (const auto& r : corpus) {
    auto v = extract_task1(r.tweet, res).flatten();
    if (v.size() != 328) {
      ++bad_dim;
      continue;
    }
    int ones = 0;
    for (std::size_t i = L.tentative(); i < L.tentative() + 4; ++i) {
      if (v[i] == 1.0) ++ones;
      else if (v[i] != 0.0) ones = 99;
    }
    bad_hot += ones != 1;
  }
  o.require(bad_dim == 0, std::to_string(bad_dim) + " vectors not 328-dim");
  o.require(bad_hot == 0, std::to_string(bad_hot) + " invalid one-hot blocks");
  o.note("1000 vectors, 328 dims each");
  return o;
}

Outcome svm_solver() {
  Outcome o;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  double worst_gap = 0, worst_kkt = 0;
  for (int p = 0; p < 5; ++p) {
    std::size_t n = 4 + rng() % 5, dim = 1 + rng() % 3;
    Matrix X;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> x(dim);
      for (double& v : x) v = g(rng);
      X.push_row(x);
      y.push_back(i % 2 ? 1 : -1);
    }
    svm::BinarySvmConfig cfg;
    cfg.C = 1.0;
    auto sol = svm::solve_binary_svm(X, y, cfg);
    std::vector<double> C(n, cfg.C);
    double exact = oracle::svm_primal_minimum(X, y, C);
    double dual = oracle::svm_dual(X, y, sol.alpha);
    auto primal = [&](const std::vector<double>& w) { return oracle::svm_primal(X, y, C, w); };
    double grid = oracle::grid_minimize(primal, std::vector<double>(dim + 1, 0.0), 4.0, 11, 30, 0.5);
    worst_gap = std::max(worst_gap, std::abs(dual - exact));
    o.require(grid >= exact - 1e-9, "grid search beat the exact oracle");
    o.require(std::abs(grid - exact) <= 1e-4, "grid oracle off by " + fmt("%.2e", grid - exact));
    for (std::size_t i = 0; i < n; ++i) {
      double m = y[i] * svm::decision(sol.model, X.row(i)) - 1.0;
      double a = sol.alpha[i];
      double v = a <= 0 ? std::max(-m, 0.0) : a >= cfg.C ? std::max(m, 0.0) : std::abs(m);
      worst_kkt = std::max(worst_kkt, v);
      o.require(a >= 0 && a <= cfg.C, "alpha outside its box");
    }
  }
  o.require(worst_gap <= 1e-4, "dual gap " + fmt("%.2e", worst_gap));
  o.require(worst_kkt < 1e-5, "KKT violation " + fmt("%.2e", worst_kkt));

  std::uniform_real_distribution<double> u(-5, 5);
  Matrix X;
  std::vector<int> y;
  while (X.rows() < 200) {
    double a = u(rng), b = u(rng);
    double s = 0.6 * a + 0.8 * b - 1.0;
    if (std::abs(s) < 0.25) continue;
    X.push_row(std::vector<double>{a, b});
    y.push_back(s > 0 ? 1 : -1);
  }
  svm::BinarySvmConfig cfg;
  cfg.C = 100;
  auto m = svm::train_binary_svm(X, y, cfg);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < 200; ++i) hit += y[i] * svm::decision(m, X.row(i)) > 0;
  o.require(hit == 200, "separable set accuracy " + std::to_string(hit) + "/200");
  o.note("max |dual - exact| " + fmt("%.1e", worst_gap) + ", max KKT " + fmt("%.1e", worst_kkt) +
         ", separable 200/200");
  return o;
}

Outcome calibration() {
  Outcome o;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  Matrix X;
  std::vector<std::size_t> y;
  const double centers[4][3] = {{2, 0, 0}, {-2, 0, 1}, {0, 2, -1}, {0, -2, 0}};
  for (std::size_t c = 0; c < 4; ++c)
    for (int i = 0; i < 40; ++i) {
      std::vector<double> x(3);
      for (int k = 0; k < 3; ++k) x[k] = centers[c][k] + g(rng);
      X.push_row(x);
      y.push_back(c);
    }
  auto model = svm::train_ovo(X, y);
  double worst = 0;
  std::normal_distribution<double> wide(0, 6);
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> x{wide(rng), wide(rng), wide(rng)};
    auto p = svm::predict_proba(model, x);
    double s = 0;
    for (double v : p) {
      s += v;
      o.require(v >= 0, "negative probability");
    }
    worst = std::max(worst, std::abs(s - 1));
  }
  o.require(worst <= 1e-9, "sum off by " + fmt("%.1e", worst));

  // Two classes: coupling returns the calibrated pairwise probability.
  Matrix X2;
  std::vector<std::size_t> y2;
  for (std::size_t i = 0; i < X.rows(); ++i)
    if (y[i] < 2) {
      X2.push_row(X.row(i));
      y2.push_back(y[i]);
    }
  auto two = svm::train_ovo(X2, y2, 2);
  double worst2 = 0;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> x{wide(rng), wide(rng), wide(rng)};
    double r = std::clamp(svm::platt_probability(two.pairs[0].platt, svm::decision(two.pairs[0].svm, two.scaler.apply(x))),
                          svm::kMinPairProbability, 1 - svm::kMinPairProbability);
    auto p = svm::predict_proba(two, x);
    worst2 = std::max({worst2, std::abs(p[0] - r), std::abs(p[1] - (1 - r))});
  }
  o.require(worst2 <= 1e-9, "2-class coupling off by " + fmt("%.1e", worst2));

  auto uniform = svm::couple_pairwise(Matrix(4, 4, 0.5));
  double worst3 = 0;
  for (double v : uniform) worst3 = std::max(worst3, std::abs(v - 0.25));
  o.require(worst3 <= 1e-9, "uniform coupling off by " + fmt("%.1e", worst3));
  o.note("max |sum-1| " + fmt("%.1e", worst) + ", 2-class " + fmt("%.1e", worst2) + ", uniform " +
         fmt("%.1e", worst3));
  return o;
}

Outcome gradient_check() {
  Outcome o;
  auto arch = cnn::cnn4_architecture(8, 10);
  std::mt19937_64 rng(5);
  auto model = gradcheck::random_model(arch, 5);
  auto xs = gradcheck::random_batch(arch, 5, rng);
  std::vector<std::size_t> ys{0, 1, 2, 3, 1};
  auto r = gradcheck::check(model, xs, ys, 1e-4);
  o.require(r.checked + r.kinks == model.parameter_count(), "not every parameter visited");
  o.require(r.kinks * 100 <= model.parameter_count(), std::to_string(r.kinks) + " kink elements");
  o.require(r.max_relative_error < 1e-4,
            "relative error " + fmt("%.2e", r.max_relative_error) + " in " + r.worst_tensor);
  o.note(std::to_string(r.checked) + " partials, max tensor relative error " + fmt("%.1e", r.max_relative_error) +
         " (" + r.worst_tensor + "), " + std::to_string(r.kinks) + " kinks skipped");
  return o;
}

Outcome architecture_audit() {
  Outcome o;
  auto m = cnn::build_cnn4(300, 50, 1);
  const auto& a = m.arch;
  o.require(a.window_widths == std::vector<std::size_t>{2, 3, 4}, "window widths");
  o.require(a.filters == 56, "filters");
  o.require(a.hidden == 200, "dense width");
  o.require(a.classes == 4, "output width");
  o.require(a.dropout == 0.2, "dropout");
  o.require(a.pooled_size() == 168, "pooled size");
  std::size_t expect = (2 * 300 * 56 + 56) + (3 * 300 * 56 + 56) + (4 * 300 * 56 + 56) + (168 * 200 + 200) + (200 * 4 + 4);
  o.require(expect == 185972 && m.parameter_count() == expect,
            "parameter count " + std::to_string(m.parameter_count()));
  const std::vector<std::vector<std::size_t>> shapes{{56, 2, 300}, {56}, {56, 3, 300}, {56}, {56, 4, 300}, {56},
                                                     {200, 168},   {200}, {4, 200},    {4}};
  for (std::size_t i = 0; i < shapes.size(); ++i)
    o.require(i < m.params.size() && m.params[i].shape == shapes[i], "shape of " + m.names[i]);
  auto tc = pipeline::cnn_train_config(pipeline::PipelineConfig{});
  o.require(tc.adam.learning_rate == 1e-4 && tc.adam.beta1 == 0.9 && tc.adam.beta2 == 0.999 &&
                tc.adam.epsilon == 1e-8 && tc.adam.decay == 0.0,
            "Adam settings");
  cnn::ExampleTrace tr = cnn::forward_example(m, cnn::SequenceInput{50, 300, 0, std::vector<double>(15000, 0.0)}, {});
  o.require(tr.probabilities.size() == 4, "softmax width");
  o.note("185972 parameters, shapes and Adam settings match");
  return o;
}

Outcome end_to_end() {
  Outcome o;
  synthetic::Spec spec;
  spec.tweets = 1000;
  auto data = synthetic::generate(spec);
  auto table = std::make_shared<EmbeddingTable>(data.table);
  auto [train_c, test_c] = stratified_split(data.corpus, SplitSpec{0.85, 42});
  auto [fit_c, val_c] = stratified_split(train_c, SplitSpec{0.85, 43});
  auto train = preprocess_corpus(train_c), test = preprocess_corpus(test_c);
  auto fit = preprocess_corpus(fit_c), val = preprocess_corpus(val_c);

  pipeline::PipelineConfig cfg;
  cfg.cnn_max_length = 20;
  pipeline::SvmTrainingInputs in;
  in.lexicon = data.lexicon;
  auto bundle = pipeline::train_svm_bundle(pipeline::SvmTask::Task1, train, table, in, cfg);
  auto svm_pred = pipeline::predict_svm(bundle, table, test);
  auto run = pipeline::train_cnn(fit, val, *table, cfg);
  auto cnn_pred = pipeline::predict_cnn(run.result.model, *table, test);
  auto hybrid = hybrid_combine(svm_pred, cnn_pred);

  auto acc = [&](const std::vector<PredictionRecord>& p) { return evaluate_run(p, test_c).metrics.accuracy; };
  double s = acc(svm_pred), c = acc(cnn_pred), h = acc(hybrid);
  o.require(s >= 0.85, "SVM accuracy " + fmt("%.3f", s));
  o.require(c >= 0.85, "CNN accuracy " + fmt("%.3f", c));
  o.require(h >= std::max(s, c) - 0.02, "hybrid accuracy " + fmt("%.3f", h));
  o.note("held-out " + std::to_string(test.size()) + " tweets: SVM " + fmt("%.3f", s) + ", CNN " +
         fmt("%.3f", c) + ", hybrid " + fmt("%.3f", h) + " (CNN best epoch " +
         std::to_string(run.result.best_epoch) + ")");
  return o;
}

Outcome preprocessing_golden() {
  Outcome o;
  const std::pair<const char*, const char*> golden[] = {
      {"holaaaa", "hola"},
      {"jajajaja", "jaja"},
      {"jejeje", "jaja"},
      {"JAJAJA", "jaja"},
      {"jajaj", "jaja"},
      {"@maria mira http://x.co/ab ...", "@user mira"},
      {"ver www.sitio.es ya", "ver ya"},
      {"bueno…nada", "bueno nada"},
      {"Hola   Mundo", "hola mundo"},
      {"MUYYYY BIEN", "muy bien"},
  };
  for (const auto& [in, out] : golden) o.require(normalize(in) == out, std::string("normalize(\"") + in + "\")");
  std::mt19937_64 rng(8);
  std::size_t failures = 0;
  for (int k = 0; k < 10000; ++k) {
    std::string s;
    std::size_t len = rng() % 48;
    for (std::size_t i = 0; i < len; ++i) {
      switch (rng() % 6) {
        case 0: s += "ja"; break;
        case 1: s += "http://"; break;
        case 2: s += "..."; break;
        default: s += static_cast<char>(32 + rng() % 95);
      }
    }
    auto n = normalize(s);
    failures += normalize(n) != n;
  }
  o.require(failures == 0, std::to_string(failures) + " non-idempotent strings");
  o.note("10 golden cases, 10000 random strings idempotent");
  return o;
}

Outcome marker_boundary() {
  Outcome o;
  using fixture::record;
  std::vector<TokenizedRecord> c{record({"gol"}, Polarity::P), record({"gol"}, Polarity::P),
                                 record({"gol"}, Polarity::P), record({"gol"}, Polarity::N),
                                 record({"tal"}, Polarity::P), record({"tal"}, Polarity::P),
                                 record({"tal"}, Polarity::N), record({"tal"}, Polarity::N)};
  auto m = compute_markers(c, 0.75, 1);
  o.require(m.words[index_of(Polarity::P)] == std::vector<std::string>{"gol"}, "3-of-4 word not a marker");
  o.require(m.total() == 1, "2-of-4 word became a marker");
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    auto corpus = fixture::random_corpus(200, rng, 10 + rng() % 30);
    std::size_t min_count = 1 + rng() % 3;
    if (compute_markers(corpus, 0.75, min_count).words != fixture::brute_force_markers(corpus, 3, 4, min_count)) {
      o.require(false, "recount mismatch in trial " + std::to_string(trial));
      break;
    }
  }
  o.note("boundary holds, 50 random corpora match the recount");
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  Outcome o;
  synthetic::Spec spec;
  spec.tweets = 300;
  auto data = synthetic::generate(spec);
  auto table = std::make_shared<EmbeddingTable>(data.table);
  auto corpus = preprocess_corpus(data.corpus);
  auto aspect_corpus = corpus;
  for (std::size_t i = 0; i < aspect_corpus.size(); ++i) aspect_corpus[i].record.aspect = i % 2 ? "A" : "B";
  std::span<const TokenizedRecord> all(corpus);

  pipeline::PipelineConfig cfg;
  cfg.cnn_max_length = 12;
  cfg.cnn_max_epochs = 8;
  pipeline::SvmTrainingInputs in;
  in.lexicon = data.lexicon;

  auto dir = std::filesystem::temp_directory_path() / ("tweetpol_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  auto train_all = [&](const std::string& tag) {
    std::vector<std::filesystem::path> files;
    auto save = [&](const std::string& name, const nlohmann::json& j) {
      files.push_back(dir / (tag + "_" + name));
      pipeline::save_json(files.back(), j);
    };
    save("markers.json", to_json(compute_markers(corpus, 0.75, 3)));
    save("polarity.json", to_json(train_polarity_predictor(data.lexicon, *table)));
    save("svm1.json", pipeline::to_json(pipeline::train_svm_bundle(pipeline::SvmTask::Task1, corpus, table, in, cfg)));
    save("svm2a.json",
         pipeline::to_json(pipeline::train_svm_bundle(pipeline::SvmTask::Task2Svm1, aspect_corpus, table, {}, cfg)));
    save("svm2b.json",
         pipeline::to_json(pipeline::train_svm_bundle(pipeline::SvmTask::Task2Svm2, aspect_corpus, table, {}, cfg)));
    save("cnn.json", pipeline::to_json(pipeline::train_cnn(all.subspan(0, 240), all.subspan(240), *table, cfg)));
    return files;
  };
  auto a = train_all("a"), b = train_all("b");
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto x = slurp(a[i]), y = slurp(b[i]);
    o.require(!x.empty() && x == y, a[i].filename().string() + " differs");
  }
  std::filesystem::remove_all(dir);
  o.note(std::to_string(a.size()) + " model files byte-identical across two runs");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"metric reproduction", metric_reproduction},
      {"feature-vector shape", feature_shape},
      {"SVM solver correctness", svm_solver},
      {"probability calibration", calibration},
      {"CNN gradient check", gradient_check},
      {"cnn4 architecture constants", architecture_audit},
      {"end-to-end planted signal", end_to_end},
      {"preprocessing golden suite", preprocessing_golden},
      {"marker rule boundary", marker_boundary},
      {"determinism", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %-28s %7.2fs  %s\n", out.pass ? "PASS" : "FAIL", index, c.name, secs, out.detail.c_str());
    std::fflush(stdout);
    failed += !out.pass;
  }
  return failed == 0 ? 0 : 1;
}
