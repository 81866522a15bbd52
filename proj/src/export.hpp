#ifndef SPECMINE_EXPORT_HPP
#define SPECMINE_EXPORT_HPP

#include <optional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "srt.hpp"

namespace specmine {

// One row of the dependency table handed to downstream formal analysis.
struct FormalDependencyRecord {
  std::string identifier0;
  std::string identifier1;
  std::string predicate;  // catalog lemma
  SecurityCategory category = SecurityCategory::Belong;
  std::string sentence_id;
  bool from_prediction = false;  // gold-annotation otherwise
  std::optional<double> confidence;  // softmax probability, predictions only

  bool operator==(const FormalDependencyRecord&) const = default;
};

// Gold-mode record straight from a filtered triple.
FormalDependencyRecord record_from_triple(const SRTTriple& triple);

// Column order is fixed: identifier0, identifier1, predicate, category,
// sentence_id, mode, confidence. Confidence prints with 6 significant
// digits; gold rows leave it empty.
void export_dependency_csv(const std::vector<FormalDependencyRecord>& records,
                           const std::string& path);
void export_dependency_jsonl(
    const std::vector<FormalDependencyRecord>& records,
    const std::string& path);

std::vector<FormalDependencyRecord> import_dependency_csv(
    const std::string& path);
std::vector<FormalDependencyRecord> import_dependency_jsonl(
    const std::string& path);

struct PredicateFrequency {
  std::string predicate;
  int label_id = 0;
  long count = 0;
};

// Per-predicate counts over a dataset, sorted by count descending (ties by
// label id). Throws Err::EmptyBatch on an empty dataset.
std::vector<PredicateFrequency> summarize_catalog(
    const std::vector<AnnotatedExample>& dataset,
    const FormalPropertyLabelMap& fp_map);

void write_catalog_summary_csv(const std::vector<PredicateFrequency>& stats,
                               const std::string& path);

}  // namespace specmine

#endif  // SPECMINE_EXPORT_HPP
