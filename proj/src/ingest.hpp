#ifndef SPECMINE_INGEST_HPP
#define SPECMINE_INGEST_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

namespace specmine {

// One pre-extracted table. PDF-to-table conversion is an external backend;
// its grid output is the contract here. Rows may be ragged.
struct TableGrid {
  std::vector<std::vector<std::string>> rows;
  std::string source_doc;
  int page = 1;
};

struct Provenance {
  std::string doc;
  int page = 1;
  int table_index = 0;  // position of the table in the ingest stream

  bool operator==(const Provenance&) const = default;
};

// Term candidates before filtering: surface form -> occurrence count and
// where each table contributed it.
struct TermCandidates {
  struct Entry {
    int count = 0;
    std::vector<Provenance> provenance;
  };
  std::map<std::string, Entry> entries;

  std::size_t distinct() const { return entries.size(); }
  std::size_t total() const;
};

struct FilterConfig {
  std::set<std::string> stop_list;            // casefolded
  std::set<std::string> domain_exclude_list;  // casefolded
  bool casefold_match = true;
  bool strip_punct = true;
  // Open choice surfaced in config: multi-word cells are split into
  // individual terms by default.
  bool split_cell_phrases = true;
};

struct TerminologyLexicon {
  std::set<std::string> terms;  // original-cased surface forms
  std::map<std::string, std::vector<Provenance>> provenance;

  bool contains(const std::string& surface) const {
    return terms.count(surface) != 0;
  }
};

// Tokenizes every cell of every table and tallies candidates with
// provenance. Empty input yields an empty candidate set.
TermCandidates collect_table_terms(const std::vector<TableGrid>& tables,
                                   const FilterConfig& cfg = {});

// Two-stage filter: generic stopwords first, then the expert domain exclude
// list. Matching casefolds (per config); the lexicon keeps the original
// surface form. Idempotent.
TerminologyLexicon hierarchical_filter(const TermCandidates& candidates,
                                       const FilterConfig& cfg);

// JSON Lines table input: one object per line,
// {"doc": str, "page": int, "rows": [[str]]}.
std::vector<TableGrid> read_tables_jsonl(const std::string& path);

// One word per line; '#'-prefixed lines are comments. Entries are
// casefolded and deduplicated.
std::set<std::string> read_word_list(const std::string& path);

void write_lexicon(const TerminologyLexicon& lexicon,
                   const std::string& terms_path,
                   const std::string& provenance_path);
TerminologyLexicon read_lexicon(const std::string& terms_path,
                                const std::string& provenance_path = "");

// A small built-in stopword list used when no stopword file is configured.
const std::set<std::string>& default_stopwords();

}  // namespace specmine

#endif  // SPECMINE_INGEST_HPP
