#ifndef SPECMINE_DATASET_HPP
#define SPECMINE_DATASET_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "srt.hpp"

namespace specmine {

// Identifier token labels are fixed: O, identifier0 (triple source),
// identifier1 (triple target).
struct IdentifierLabelMap {
  static constexpr int kOutside = 0;
  static constexpr int kIdentifier0 = 1;
  static constexpr int kIdentifier1 = 2;
  static constexpr int kNumLabels = 3;
  static const char* name(int label);
};

// O plus the 23 catalog predicates. Predicate ids are assigned by first
// appearance in the corpus, the remaining catalog words follow in catalog
// order, and the result is persisted so reloads reproduce identical ids.
class FormalPropertyLabelMap {
 public:
  FormalPropertyLabelMap();

  // Existing id, or the next free one (recorded in appearance order).
  int assign(const std::string& lemma);
  int id_for(const std::string& lemma) const;     // throws Err::Config if absent
  const std::string& word_for(int id) const;      // throws Err::Config if absent
  bool contains(const std::string& lemma) const;

  // Gives every catalog predicate an id so the map always holds 24 labels.
  void complete_from_catalog();

  std::size_t size() const { return by_word_.size(); }  // includes O

  void save(const std::string& path) const;
  static FormalPropertyLabelMap load(const std::string& path);
  static FormalPropertyLabelMap from_entries(
      const std::map<std::string, int>& entries);

  std::uint64_t hash() const;
  const std::map<std::string, int>& entries() const { return by_word_; }

  static constexpr int kNumLabels = 24;

 private:
  std::map<std::string, int> by_word_;
  std::vector<std::string> by_id_;
};

// A labeled training example: the originating sentence words, then a
// separator, then the triple words. Spans are labeled on the sentence
// portion.
struct AnnotatedExample {
  std::vector<std::string> words;
  std::vector<int> identifier_labels;  // aligned with words, values 0/1/2
  std::vector<int> fp_labels;          // aligned with words, 0..23
  int gold_relation_id = 0;
  std::string sentence_id;
};

inline constexpr const char* kTripleSeparator = "[SEP]";

// Throws when an example violates the shape contract: aligned label
// sequences, exactly one contiguous identifier0 span and one identifier1
// span, and at least one non-O formal-property label.
void check_example_invariants(const AnnotatedExample& example);

// Labels the triple's spans inside its sentence and appends the separator
// plus the source/relation/target words. Throws Err::SpanConflict when the
// source and target spans overlap (or the relation span crosses either).
AnnotatedExample annotate(const SRTTriple& triple,
                          FormalPropertyLabelMap& fp_map);

// Keeps exactly the examples whose word count is <= max_words.
std::vector<AnnotatedExample> length_filter(
    const std::vector<AnnotatedExample>& examples, std::size_t max_words = 200);

// Shuffles (seeded) then splits. The validation side gets
// clamp(floor(n * valid_fraction), 1, n-1) examples; fewer than two examples
// cannot be split.
std::pair<std::vector<AnnotatedExample>, std::vector<AnnotatedExample>>
split_dataset(const std::vector<AnnotatedExample>& examples,
              double valid_fraction, std::uint64_t seed);

struct SynthConfig {
  int num_examples = 500;
  int num_identifiers = 40;  // camel-case identifier vocabulary size
  int min_sentence_words = 8;
  int max_sentence_words = 40;
  // Relative predicate frequencies. The default mirrors the skew observed
  // in real corpora (include >> contain >> utilize).
  std::vector<std::pair<std::string, double>> predicate_weights = {
      {"include", 620.0}, {"contain", 327.0}, {"utilize", 10.0}};
  std::uint64_t seed = 1;
};

// Deterministic synthetic corpus. Identifiers use a distinctive camel-case
// surface pattern so the labeling task is learnable at desk scale; predicate
// counts follow the configured weights via largest-remainder apportionment,
// so empirical frequencies match the requested proportions up to rounding.
std::vector<AnnotatedExample> generate_synthetic_corpus(
    const SynthConfig& cfg, FormalPropertyLabelMap& fp_map);

std::string example_to_json(const AnnotatedExample& example);
AnnotatedExample example_from_json(const std::string& line);
void write_examples_jsonl(const std::vector<AnnotatedExample>& examples,
                          const std::string& path);
std::vector<AnnotatedExample> read_examples_jsonl(const std::string& path);

}  // namespace specmine

#endif  // SPECMINE_DATASET_HPP
