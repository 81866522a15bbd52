#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <map>

#include "common.hpp"
#include "dataset.hpp"
#include "text.hpp"

using namespace specmine;

namespace {

SRTTriple paper_style_triple() {
  SRTTriple t;
  t.sentence_id = "s0001";
  t.sentence_text = "The RRCReconfiguration includes the masterCellGroup .";
  t.source = "RRCReconfiguration";
  t.source_span = {1, 2};
  t.relation = "includes";
  t.lemma = "include";
  t.relation_span = {2, 3};
  t.target = "masterCellGroup";
  t.target_span = {4, 5};
  return t;
}

AnnotatedExample minimal_example(std::size_t n_words,
                                 const std::string& id = "x") {
  // Layout: id0, relation, id1, then filler.
  REQUIRE(n_words >= 3);
  AnnotatedExample e;
  e.sentence_id = id;
  e.words.assign(n_words, "w");
  e.identifier_labels.assign(n_words, 0);
  e.fp_labels.assign(n_words, 0);
  e.identifier_labels[0] = IdentifierLabelMap::kIdentifier0;
  e.identifier_labels[2] = IdentifierLabelMap::kIdentifier1;
  e.fp_labels[1] = 1;
  e.gold_relation_id = 1;
  return e;
}

}  // namespace

TEST_CASE("identifier label map is fixed") {
  CHECK(IdentifierLabelMap::kOutside == 0);
  CHECK(IdentifierLabelMap::kIdentifier0 == 1);
  CHECK(IdentifierLabelMap::kIdentifier1 == 2);
  CHECK(IdentifierLabelMap::kNumLabels == 3);
}

TEST_CASE("fp label map assigns by first appearance and persists") {
  FormalPropertyLabelMap map;
  CHECK(map.size() == 1);  // O only
  CHECK(map.assign("include") == 1);
  CHECK(map.assign("contain") == 2);
  CHECK(map.assign("include") == 1);  // stable
  CHECK(map.word_for(2) == "contain");
  CHECK_THROWS_AS(map.assign("schedule"), Error);  // not a catalog word

  map.complete_from_catalog();
  CHECK(map.size() == 24);
  // Bijectivity over all 24 labels.
  for (int id = 0; id < FormalPropertyLabelMap::kNumLabels; ++id) {
    CHECK(map.id_for(map.word_for(id)) == id);
  }

  const std::string path = "/tmp/specmine_fp_map_test.json";
  map.save(path);
  auto loaded = FormalPropertyLabelMap::load(path);
  CHECK(loaded.size() == 24);
  CHECK(loaded.hash() == map.hash());
  for (const auto& [word, id] : map.entries()) {
    CHECK(loaded.id_for(word) == id);
  }
  std::remove(path.c_str());
}

TEST_CASE("fp label map rejects non-contiguous ids") {
  CHECK_THROWS_AS(
      FormalPropertyLabelMap::from_entries({{"O", 0}, {"include", 5}}), Error);
  CHECK_THROWS_AS(FormalPropertyLabelMap::from_entries({{"O", 2}}), Error);
}

TEST_CASE("annotate labels the triple spans inside the sentence") {
  FormalPropertyLabelMap fp_map;
  auto example = annotate(paper_style_triple(), fp_map);

  // Sentence (6 words) + separator + source/relation/target.
  REQUIRE(example.words.size() == 10);
  CHECK(example.words[6] == kTripleSeparator);
  CHECK(example.words[7] == "RRCReconfiguration");
  CHECK(example.words[8] == "includes");
  CHECK(example.words[9] == "masterCellGroup");

  std::vector<int> expected_idf = {0, 1, 0, 0, 2, 0, 0, 0, 0, 0};
  CHECK(example.identifier_labels == expected_idf);

  const int include_id = fp_map.id_for("include");
  std::vector<int> expected_fp(10, 0);
  expected_fp[2] = include_id;
  CHECK(example.fp_labels == expected_fp);
  CHECK(example.gold_relation_id == include_id);
  CHECK_NOTHROW(check_example_invariants(example));
}

TEST_CASE("annotate rejects overlapping spans") {
  FormalPropertyLabelMap fp_map;
  auto overlap = paper_style_triple();
  overlap.target_span = overlap.source_span;
  try {
    annotate(overlap, fp_map);
    FAIL("expected SpanConflict");
  } catch (const Error& e) {
    CHECK(e.code() == Err::SpanConflict);
  }

  auto crossing = paper_style_triple();
  crossing.relation_span = {1, 2};  // collides with the source
  try {
    annotate(crossing, fp_map);
    FAIL("expected SpanConflict");
  } catch (const Error& e) {
    CHECK(e.code() == Err::SpanConflict);
  }
}

TEST_CASE("annotate rejects out-of-bounds spans") {
  FormalPropertyLabelMap fp_map;
  auto bad = paper_style_triple();
  bad.target_span = {40, 41};
  CHECK_THROWS_AS(annotate(bad, fp_map), Error);
}

TEST_CASE("length filter keeps examples at the boundary") {
  std::vector<AnnotatedExample> examples = {
      minimal_example(200, "keep"), minimal_example(201, "drop"),
      minimal_example(10, "small")};
  auto kept = length_filter(examples, 200);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].sentence_id == "keep");
  CHECK(kept[1].sentence_id == "small");
}

TEST_CASE("split is deterministic and partitions the input") {
  std::vector<AnnotatedExample> examples;
  for (int i = 0; i < 10; ++i) {
    examples.push_back(minimal_example(8, "ex" + std::to_string(i)));
  }
  auto [train1, valid1] = split_dataset(examples, 0.2, 7);
  CHECK(train1.size() == 8);
  CHECK(valid1.size() == 2);

  auto [train2, valid2] = split_dataset(examples, 0.2, 7);
  for (std::size_t i = 0; i < train1.size(); ++i) {
    CHECK(train1[i].sentence_id == train2[i].sentence_id);
  }
  for (std::size_t i = 0; i < valid1.size(); ++i) {
    CHECK(valid1[i].sentence_id == valid2[i].sentence_id);
  }

  // Union equals the input multiset.
  std::vector<std::string> ids;
  for (const auto& e : train1) ids.push_back(e.sentence_id);
  for (const auto& e : valid1) ids.push_back(e.sentence_id);
  std::sort(ids.begin(), ids.end());
  std::vector<std::string> expected;
  for (const auto& e : examples) expected.push_back(e.sentence_id);
  std::sort(expected.begin(), expected.end());
  CHECK(ids == expected);

  auto [train3, valid3] = split_dataset(examples, 0.2, 8);
  bool same = true;
  for (std::size_t i = 0; i < valid1.size(); ++i) {
    same = same && valid1[i].sentence_id == valid3[i].sentence_id;
  }
  // Different seeds shuffle differently (pathologically equal shuffles are
  // possible but not for this fixed pair of seeds).
  CHECK_FALSE(same);
}

TEST_CASE("split clamps both sides to at least one example") {
  std::vector<AnnotatedExample> two = {minimal_example(8, "a"),
                                       minimal_example(8, "b")};
  auto [train, valid] = split_dataset(two, 0.99, 3);
  CHECK(train.size() == 1);
  CHECK(valid.size() == 1);

  auto [train_low, valid_low] = split_dataset(two, 0.01, 3);
  CHECK(train_low.size() == 1);
  CHECK(valid_low.size() == 1);

  std::vector<AnnotatedExample> one = {minimal_example(8, "solo")};
  CHECK_THROWS_AS(split_dataset(one, 0.5, 1), Error);
  CHECK_THROWS_AS(split_dataset(two, 0.0, 1), Error);
  CHECK_THROWS_AS(split_dataset(two, 1.0, 1), Error);
}

TEST_CASE("synthetic corpus is deterministic under a fixed seed") {
  SynthConfig cfg;
  cfg.num_examples = 120;
  cfg.seed = 1;
  FormalPropertyLabelMap map1, map2;
  auto a = generate_synthetic_corpus(cfg, map1);
  auto b = generate_synthetic_corpus(cfg, map2);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(example_to_json(a[i]) == example_to_json(b[i]));
  }
  CHECK(map1.hash() == map2.hash());
}

TEST_CASE("synthetic predicate mix follows the configured proportions") {
  SynthConfig cfg;
  cfg.num_examples = 500;
  cfg.seed = 11;
  // Skew taken from observed corpus statistics.
  cfg.predicate_weights = {{"include", 620}, {"contain", 327}, {"utilize", 10}};
  FormalPropertyLabelMap fp_map;
  auto corpus = generate_synthetic_corpus(cfg, fp_map);

  std::map<std::string, long> counts;
  for (const auto& e : corpus) {
    counts[fp_map.word_for(e.gold_relation_id)] += 1;
  }
  const double total_weight = 620 + 327 + 10;
  for (const auto& [word, weight] :
       std::map<std::string, double>{{"include", 620}, {"contain", 327},
                                     {"utilize", 10}}) {
    const double expected = 500.0 * weight / total_weight;
    CAPTURE(word);
    // Largest-remainder apportionment lands within one example of the
    // exact share, well inside the +-5% budget.
    CHECK(std::abs(counts[word] - expected) <= 1.0 + 1e-9);
    CHECK(std::abs(counts[word] / 500.0 - weight / total_weight) <= 0.05);
  }
}

TEST_CASE("every synthetic example passes the invariant suite") {
  SynthConfig cfg;
  cfg.num_examples = 200;
  cfg.seed = 5;
  FormalPropertyLabelMap fp_map;
  for (const auto& e : generate_synthetic_corpus(cfg, fp_map)) {
    CHECK_NOTHROW(check_example_invariants(e));
    // The relation label agrees with the recorded gold id.
    int non_zero = 0;
    for (int v : e.fp_labels) {
      if (v != 0) {
        ++non_zero;
        CHECK(v == e.gold_relation_id);
      }
    }
    CHECK(non_zero == 1);
    CHECK(e.words.size() <= 40u + 4u);
    CHECK(e.words.size() >= 8u + 4u);
  }
}

TEST_CASE("example JSONL round-trips") {
  FormalPropertyLabelMap fp_map;
  auto example = annotate(paper_style_triple(), fp_map);
  auto round = example_from_json(example_to_json(example));
  CHECK(round.words == example.words);
  CHECK(round.identifier_labels == example.identifier_labels);
  CHECK(round.fp_labels == example.fp_labels);
  CHECK(round.gold_relation_id == example.gold_relation_id);
  CHECK(round.sentence_id == example.sentence_id);
}

TEST_CASE("invariant checks catch malformed examples") {
  auto good = minimal_example(8);
  CHECK_NOTHROW(check_example_invariants(good));

  auto two_spans = good;
  two_spans.identifier_labels[5] = IdentifierLabelMap::kIdentifier0;
  CHECK_THROWS_AS(check_example_invariants(two_spans), Error);

  auto no_fp = good;
  no_fp.fp_labels[1] = 0;
  CHECK_THROWS_AS(check_example_invariants(no_fp), Error);

  auto misaligned = good;
  misaligned.fp_labels.pop_back();
  CHECK_THROWS_AS(check_example_invariants(misaligned), Error);
}
