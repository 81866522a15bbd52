#ifndef SPECMINE_SRT_HPP
#define SPECMINE_SRT_HPP

#include <memory>
#include <string>
#include <vector>

#include "catalog.hpp"
#include "ingest.hpp"

namespace specmine {

struct DepEdge {
  int head = -1;  // -1 marks the root edge
  int dep = 0;
  std::string label;
};

struct ParsedSentence {
  std::string sentence_id;
  std::string text;
  std::vector<std::string> tokens;
  std::vector<std::string> pos_tags;
  std::vector<DepEdge> dep_edges;

  // Throws Err::ParseFailure when the schema invariants do not hold
  // (aligned tag list, in-range edge indices, exactly one root).
  void validate() const;
};

ParsedSentence parsed_sentence_from_json(const std::string& line);
std::string parsed_sentence_to_json(const ParsedSentence& parsed);

// Adapter boundary for the dependency parser. The reference deployment is an
// external CoreNLP-style service; anything producing the same schema
// qualifies. Implementations must declare whether concurrent calls are safe.
class ParserBackend {
 public:
  virtual ~ParserBackend() = default;
  virtual ParsedSentence parse(const std::string& sentence_id,
                               const std::string& text) = 0;
  virtual bool concurrent_safe() const { return false; }
  virtual std::string name() const = 0;
};

// Serves committed golden parses from a JSONL file, keyed by sentence text
// (exact match) with sentence id as fallback. Lets every downstream stage
// run without a live parser.
class FixtureBackend : public ParserBackend {
 public:
  explicit FixtureBackend(const std::string& jsonl_path);
  ParsedSentence parse(const std::string& sentence_id,
                       const std::string& text) override;
  bool concurrent_safe() const override { return true; }
  std::string name() const override { return "fixture"; }

 private:
  std::vector<ParsedSentence> records_;
};

// POSTs {"sentence_id", "text"} to <endpoint>/parse and expects a
// ParsedSentence JSON object back.
class HttpBackend : public ParserBackend {
 public:
  explicit HttpBackend(const std::string& endpoint);
  ParsedSentence parse(const std::string& sentence_id,
                       const std::string& text) override;
  bool concurrent_safe() const override { return true; }
  std::string name() const override { return "http"; }

 private:
  std::string host_;
  int port_ = 80;
  std::string path_prefix_;
};

std::unique_ptr<ParserBackend> make_backend(const std::string& kind,
                                            const std::string& endpoint,
                                            const std::string& fixture_path);

// Rejects empty input before touching the backend, then validates the
// backend's output against the schema invariants.
ParsedSentence parse_dependencies(const std::string& sentence_id,
                                  const std::string& text,
                                  ParserBackend& backend);

struct TokenSpan {
  int begin = 0;
  int end = 0;  // exclusive

  bool overlaps(const TokenSpan& other) const {
    return begin < other.end && other.begin < end;
  }
  bool operator==(const TokenSpan&) const = default;
};

struct SRTTriple {
  std::string source;
  TokenSpan source_span;
  std::string relation;
  std::string lemma;  // lowercase, via lemmatize()
  TokenSpan relation_span;
  std::string target;
  TokenSpan target_span;
  std::string sentence_id;
  std::string sentence_text;
};

struct ExtractOptions {
  // Copula and prepositional-object fallbacks beyond the plain
  // subject-verb-object pattern. Off by default.
  bool enable_fallback_patterns = false;
};

// One triple per (subject, verb, object) pattern in the dependency edges,
// in verb-then-subject-then-object token order. Verbless input yields an
// empty list.
std::vector<SRTTriple> extract_srt(const ParsedSentence& parsed,
                                   const ExtractOptions& opts = {});

// Stage 1 of the triple funnel: keep triples whose source and target
// surfaces (outer punctuation stripped) are lexicon members.
std::vector<SRTTriple> filter_by_lexicon(const std::vector<SRTTriple>& triples,
                                         const TerminologyLexicon& lexicon);

// Stage 2: keep triples whose relation lemma is a catalog predicate.
std::vector<SRTTriple> filter_by_predicate(
    const std::vector<SRTTriple>& triples, const PredicateCatalog& catalog);

// Both stages in order; preserves input order.
std::vector<SRTTriple> filter_triples(const std::vector<SRTTriple>& triples,
                                      const TerminologyLexicon& lexicon,
                                      const PredicateCatalog& catalog);

std::string triple_to_json(const SRTTriple& triple);
SRTTriple triple_from_json(const std::string& line);
void write_triples_jsonl(const std::vector<SRTTriple>& triples,
                         const std::string& path);
std::vector<SRTTriple> read_triples_jsonl(const std::string& path);

}  // namespace specmine

#endif  // SPECMINE_SRT_HPP
