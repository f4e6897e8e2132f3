// Writes a planted-signal corpus with a matching embedding table and lexicon.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tweetpol/tweetpol.hpp"

namespace fs = std::filesystem;
using namespace tweetpol;

int main(int argc, char** argv) {
  CLI::App app{"planted-signal fixture generator"};
  synthetic::Spec spec;
  std::string dir;
  app.add_option("--tweets", spec.tweets, "number of tweets")->capture_default_str();
  app.add_option("--dim", spec.dimension, "embedding dimension")->capture_default_str();
  app.add_option("--seed", spec.seed, "generator seed")->capture_default_str();
  app.add_option("--cross-talk", spec.cross_talk, "chance of one off-class word")->capture_default_str();
  app.add_option("--out-dir", dir, "output directory")->required();
  CLI11_PARSE(app, argc, argv);
  try {
    fs::create_directories(dir);
    auto ds = synthetic::generate(spec);
    save_corpus(fs::path(dir) / "corpus.jsonl", ds.corpus, CorpusFormat::Jsonl);
    std::ofstream emb(fs::path(dir) / "embeddings.txt");
    write_embeddings(emb, ds.table);
    save_word_list(fs::path(dir) / "lexicon.pos", ds.lexicon.positive);
    save_word_list(fs::path(dir) / "lexicon.neg", ds.lexicon.negative);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
