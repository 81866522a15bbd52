#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "common.hpp"
#include "dataset.hpp"
#include "train.hpp"
#include "wordpiece.hpp"

using namespace specmine;

namespace {

struct TinySetup {
  std::vector<ModelReadyExample> train;
  std::vector<ModelReadyExample> valid;
  int vocab_size = 0;
};

TinySetup tiny_setup(int n, std::uint64_t seed, int min_words = 8,
                     int max_words = 16) {
  SynthConfig sc;
  sc.num_examples = n;
  sc.seed = seed;
  sc.min_sentence_words = min_words;
  sc.max_sentence_words = max_words;
  FormalPropertyLabelMap fp_map;
  auto corpus = generate_synthetic_corpus(sc, fp_map);
  auto vocab = WordPieceVocab::build(corpus);
  WordPieceTokenizer tok(vocab);
  auto [train, valid] = split_dataset(corpus, 0.2, seed);
  TinySetup out;
  out.vocab_size = static_cast<int>(vocab.size());
  for (const auto& e : train) out.train.push_back(align_to_subwords(e, tok));
  for (const auto& e : valid) out.valid.push_back(align_to_subwords(e, tok));
  return out;
}

TrainConfig fast_config(int epochs, std::uint64_t seed = 3) {
  TrainConfig tc;
  tc.learning_rate = 3e-3;
  tc.epochs = epochs;
  tc.batch_size = 8;
  tc.seed = seed;
  return tc;
}

}  // namespace

TEST_CASE("acc_idf counts scorable tokens only") {
  // gold [O,1,2,O] vs pred [O,1,O,O]: 3 of 4 correct.
  CHECK(acc_idf({{0, 1, 2, 0}}, {{0, 1, 0, 0}}) == doctest::Approx(0.75));
  CHECK(acc_idf({{0, 1, 2, 0}}, {{0, 1, 2, 0}}) == 1.0);

  // Ignore-marked positions drop out of both sides of the ratio.
  CHECK(acc_idf({{0, 1}, {2, 0}},
                {{0, kIgnoreLabel}, {2, kIgnoreLabel}}) == 1.0);

  CHECK_THROWS_AS(acc_idf({}, {}), Error);
  CHECK_THROWS_AS(acc_idf({{0}}, {{kIgnoreLabel}}), Error);
  CHECK_THROWS_AS(acc_idf({{0, 1}}, {{0}}), Error);
}

TEST_CASE("acc_fprop scores the gold relation position per example") {
  // Batch of 4, two correct at the relation position.
  std::vector<std::vector<int>> gold = {
      {0, 5, 0}, {0, 0, 7}, {3, 0, 0}, {0, 9, 0}};
  std::vector<std::vector<int>> pred = {
      {0, 5, 0},   // correct
      {0, 0, 2},   // wrong id at the relation
      {3, 3, 3},   // correct (position 0)
      {9, 0, 0}};  // right id, wrong position
  CHECK(acc_fprop(pred, gold) == doctest::Approx(0.5));
  CHECK(acc_fprop(gold, gold) == 1.0);

  // any-position mode credits the stray 9.
  CHECK(acc_fprop(pred, gold, /*any_position=*/true) == doctest::Approx(0.75));

  CHECK_THROWS_AS(acc_fprop({}, {}), Error);
  CHECK_THROWS_AS(acc_fprop({{0, 0}}, {{0, 0}}), Error);      // no relation
  CHECK_THROWS_AS(acc_fprop({{5, 5}}, {{5, 5}}), Error);      // two relations
}

TEST_CASE("metrics agree exactly with a brute-force recount") {
  std::mt19937_64 rng(99);
  for (int batch = 0; batch < 25; ++batch) {
    const int batch_size = 1 + static_cast<int>(draw_below(rng, 16));
    std::vector<std::vector<int>> gold_idf, pred_idf, gold_fp, pred_fp;
    for (int e = 0; e < batch_size; ++e) {
      const int len = 2 + static_cast<int>(draw_below(rng, 49));
      std::vector<int> gi(len), pi(len), gf(len, 0), pf(len);
      for (int i = 0; i < len; ++i) {
        gi[i] = draw_below(rng, 5) == 0 ? kIgnoreLabel
                                        : static_cast<int>(draw_below(rng, 3));
        pi[i] = static_cast<int>(draw_below(rng, 3));
        pf[i] = static_cast<int>(draw_below(rng, 24));
      }
      gf[draw_below(rng, len)] = 1 + static_cast<int>(draw_below(rng, 23));
      gold_idf.push_back(gi);
      pred_idf.push_back(pi);
      gold_fp.push_back(gf);
      pred_fp.push_back(pf);
    }

    // Brute force, written independently of the implementation.
    long correct = 0, scorable = 0, fprop_hits = 0;
    for (int e = 0; e < batch_size; ++e) {
      for (std::size_t i = 0; i < gold_idf[e].size(); ++i) {
        if (gold_idf[e][i] == kIgnoreLabel) continue;
        ++scorable;
        if (gold_idf[e][i] == pred_idf[e][i]) ++correct;
      }
      for (std::size_t i = 0; i < gold_fp[e].size(); ++i) {
        if (gold_fp[e][i] > 0) {
          if (pred_fp[e][i] == gold_fp[e][i]) ++fprop_hits;
          break;
        }
      }
    }
    if (scorable == 0) continue;
    CHECK(acc_idf(pred_idf, gold_idf) ==
          static_cast<double>(correct) / static_cast<double>(scorable));
    CHECK(acc_fprop(pred_fp, gold_fp) ==
          static_cast<double>(fprop_hits) / static_cast<double>(batch_size));
  }
}

TEST_CASE("confusion accumulation is a plain tally") {
  std::vector<std::vector<long>> counts(3, std::vector<long>(3, 0));
  accumulate_confusion({0, 1, 2, 1, kIgnoreLabel}, {0, 2, 2, 1, 0}, counts);
  CHECK(counts[0][0] == 1);
  CHECK(counts[1][2] == 1);
  CHECK(counts[2][2] == 1);
  CHECK(counts[1][1] == 1);

  // Perfect predictions put everything on the diagonal.
  std::vector<std::vector<long>> diag(3, std::vector<long>(3, 0));
  accumulate_confusion({0, 1, 2, 2}, {0, 1, 2, 2}, diag);
  for (int g = 0; g < 3; ++g) {
    for (int p = 0; p < 3; ++p) {
      CHECK(diag[g][p] == (g == p ? (g == 2 ? 2 : 1) : 0));
    }
  }
}

TEST_CASE("weight decay exempts bias and block layernorms exactly") {
  auto setup = tiny_setup(12, 31);
  JointModel model(EncoderConfig::tiny(), ModelVariant::Joint2,
                   setup.vocab_size, 1);
  Trainer trainer(model, fast_config(1));

  int exempt = 0, decayed = 0;
  for (const auto& state : trainer.optimizer().state()) {
    const bool name_matches = state.name.find("bias") != std::string::npos ||
                              state.name.find("ln_1") != std::string::npos ||
                              state.name.find("ln_2") != std::string::npos;
    CAPTURE(state.name);
    if (name_matches) {
      CHECK(state.weight_decay == 0.0);
      ++exempt;
    } else {
      CHECK(state.weight_decay == 0.1);
      ++decayed;
    }
  }
  CHECK(exempt > 0);
  CHECK(decayed > 0);
}

TEST_CASE("training is deterministic under a fixed seed") {
  auto setup = tiny_setup(24, 17);
  auto run = [&] {
    JointModel model(EncoderConfig::tiny(), ModelVariant::Joint2,
                     setup.vocab_size, 5);
    Trainer trainer(model, fast_config(2, 9));
    return trainer.train(setup.train, setup.valid);
  };
  auto h1 = run();
  auto h2 = run();
  REQUIRE(h1.size() == h2.size());
  for (std::size_t i = 0; i < h1.size(); ++i) {
    CHECK(h1[i].train_idf == h2[i].train_idf);
    CHECK(h1[i].train_fprop == h2[i].train_fprop);
    CHECK(h1[i].valid_idf == h2[i].valid_idf);
    CHECK(h1[i].valid_fprop == h2[i].valid_fprop);
    CHECK(h1[i].train_loss == h2[i].train_loss);
    CHECK(h1[i].valid_loss == h2[i].valid_loss);
  }
}

TEST_CASE("short training beats the random-guess identifier baseline") {
  auto setup = tiny_setup(60, 23);
  JointModel model(EncoderConfig::tiny(), ModelVariant::Joint2,
                   setup.vocab_size, 5);
  Trainer trainer(model, fast_config(5));
  auto history = trainer.train(setup.train, setup.valid);
  REQUIRE(history.size() == 5);
  // Three identifier labels: random guessing sits at 1/3.
  CHECK(history.back().train_idf > 1.0 / 3.0);
  for (const auto& rec : history) {
    CHECK(rec.train_idf >= 0.0);
    CHECK(rec.train_idf <= 1.0);
    CHECK(rec.valid_fprop >= 0.0);
    CHECK(rec.valid_fprop <= 1.0);
  }
}

TEST_CASE("invalid train configs are rejected") {
  TrainConfig tc;
  tc.epochs = 0;
  CHECK_THROWS_AS(tc.validate(), Error);
  tc = TrainConfig{};
  tc.learning_rate = 0;
  CHECK_THROWS_AS(tc.validate(), Error);
  tc = TrainConfig{};
  tc.weight_decay = -0.5;
  CHECK_THROWS_AS(tc.validate(), Error);
}

TEST_CASE("non-finite losses abort with the epoch index") {
  auto setup = tiny_setup(10, 37);
  JointModel model(EncoderConfig::tiny(), ModelVariant::Disjoint,
                   setup.vocab_size, 5);
  // A poisoned parameter is what real divergence leaves behind.
  model.mutable_param("fp_head.fc2.bias")
      .setConstant(std::numeric_limits<double>::quiet_NaN());
  Trainer trainer(model, fast_config(1));
  try {
    trainer.train(setup.train, setup.valid);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.code() == Err::Divergence);
    CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
  }
}

TEST_CASE("empty splits are rejected") {
  auto setup = tiny_setup(10, 41);
  JointModel model(EncoderConfig::tiny(), ModelVariant::Joint1,
                   setup.vocab_size, 5);
  Trainer trainer(model, fast_config(1));
  CHECK_THROWS_AS(trainer.train({}, setup.valid), Error);
  CHECK_THROWS_AS(trainer.train(setup.train, {}), Error);
}

TEST_CASE("freezing the encoder leaves its parameters untouched") {
  auto setup = tiny_setup(16, 53);
  EncoderConfig cfg = EncoderConfig::tiny();
  cfg.freeze_encoder = true;
  JointModel model(cfg, ModelVariant::Joint2, setup.vocab_size, 5);

  std::map<std::string, nn::Matrix> before;
  for (const auto& p : model.params()) before[p.name] = p.value;

  Trainer trainer(model, fast_config(1));
  trainer.train(setup.train, setup.valid);

  bool heads_moved = false;
  for (const auto& p : model.params()) {
    if (JointModel::is_head_param(p.name)) {
      heads_moved = heads_moved || p.value != before[p.name];
    } else {
      CAPTURE(p.name);
      CHECK(p.value == before[p.name]);
    }
  }
  CHECK(heads_moved);
}

TEST_CASE("confusion marginals equal dataset label counts") {
  auto setup = tiny_setup(16, 43);
  JointModel model(EncoderConfig::tiny(), ModelVariant::Joint2,
                   setup.vocab_size, 5);
  Trainer trainer(model, fast_config(1));
  trainer.train(setup.train, setup.valid);
  auto dist = trainer.error_distribution(setup.valid);

  std::vector<long> idf_gold(IdentifierLabelMap::kNumLabels, 0);
  std::vector<long> fp_gold(FormalPropertyLabelMap::kNumLabels, 0);
  for (const auto& e : setup.valid) {
    for (int v : e.identifier_labels) {
      if (v != kIgnoreLabel) ++idf_gold[v];
    }
    for (int v : e.fp_labels) {
      if (v != kIgnoreLabel) ++fp_gold[v];
    }
  }
  for (int g = 0; g < IdentifierLabelMap::kNumLabels; ++g) {
    long row = 0;
    for (long v : dist.identifier[g]) row += v;
    CHECK(row == idf_gold[g]);
  }
  for (int g = 0; g < FormalPropertyLabelMap::kNumLabels; ++g) {
    long row = 0;
    for (long v : dist.fp[g]) row += v;
    CHECK(row == fp_gold[g]);
  }
}

TEST_CASE("undertrained models on O-heavy data err toward O") {
  // Long sentences make almost every token O; after one epoch the model
  // should still be predicting O nearly everywhere, so identifier errors
  // concentrate on gold 1/2 -> predicted 0.
  auto setup = tiny_setup(24, 47, /*min_words=*/30, /*max_words=*/36);
  JointModel model(EncoderConfig::tiny(), ModelVariant::Joint1,
                   setup.vocab_size, 5);
  Trainer trainer(model, fast_config(1));
  trainer.train(setup.train, setup.valid);
  auto dist = trainer.error_distribution(setup.train);

  long to_outside = dist.identifier[1][0] + dist.identifier[2][0];
  long other_errors = dist.identifier[0][1] + dist.identifier[0][2] +
                      dist.identifier[1][2] + dist.identifier[2][1];
  CHECK(to_outside >= other_errors);
}

TEST_CASE("metric history lands in the CSV schema") {
  std::vector<MetricRecord> history = {{1, 0.5, 0.25, 0.4, 0.2, 1.5, 1.75}};
  const std::string path = "/tmp/specmine_metrics_test.csv";
  write_metrics_csv(history, path);
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  CHECK(header ==
        "epoch,train_idf,train_fprop,valid_idf,valid_fprop,train_loss,"
        "valid_loss");
  std::getline(in, line);
  CHECK(line == "1,0.500000,0.250000,0.400000,0.200000,1.500000,1.750000");
  std::remove(path.c_str());
}
