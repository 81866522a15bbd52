#include "ingest.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "text.hpp"

namespace specmine {

using nlohmann::json;

std::size_t TermCandidates::total() const {
  std::size_t n = 0;
  for (const auto& [term, entry] : entries) n += entry.count;
  return n;
}

TermCandidates collect_table_terms(const std::vector<TableGrid>& tables,
                                   const FilterConfig& cfg) {
  TermCandidates out;
  int table_index = 0;
  for (const auto& table : tables) {
    Provenance prov{table.source_doc, table.page, table_index++};
    for (const auto& row : table.rows) {
      for (const auto& cell : row) {
        std::vector<std::string> tokens;
        if (cfg.split_cell_phrases) {
          tokens = tokenize_cell(cell);
        } else {
          std::string whole = cfg.strip_punct ? strip_outer_punct(cell)
                                              : std::string(cell);
          if (!whole.empty()) tokens.push_back(std::move(whole));
        }
        for (auto& token : tokens) {
          auto& entry = out.entries[token];
          entry.count += 1;
          if (entry.provenance.empty() || !(entry.provenance.back() == prov)) {
            entry.provenance.push_back(prov);
          }
        }
      }
    }
  }
  return out;
}

TerminologyLexicon hierarchical_filter(const TermCandidates& candidates,
                                       const FilterConfig& cfg) {
  TerminologyLexicon lexicon;
  for (const auto& [surface, entry] : candidates.entries) {
    const std::string key = cfg.casefold_match ? casefold(surface) : surface;
    if (cfg.stop_list.count(key)) continue;          // stage 1: stopwords
    if (cfg.domain_exclude_list.count(key)) continue;  // stage 2: expert list
    lexicon.terms.insert(surface);
    auto& prov = lexicon.provenance[surface];
    prov.insert(prov.end(), entry.provenance.begin(), entry.provenance.end());
  }
  return lexicon;
}

std::vector<TableGrid> read_tables_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::Io, "cannot open table file: " + path);
  std::vector<TableGrid> tables;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(Err::Parse, path + ":" + std::to_string(lineno) +
                                  ": invalid table JSON");
    }
    TableGrid table;
    table.source_doc = j.value("doc", "");
    table.page = j.value("page", 1);
    if (table.page < 1) {
      throw Error(Err::Parse, path + ":" + std::to_string(lineno) +
                                  ": page must be >= 1");
    }
    const auto rows = j.find("rows");
    if (rows == j.end() || !rows->is_array()) {
      throw Error(Err::Parse, path + ":" + std::to_string(lineno) +
                                  ": missing rows array");
    }
    for (const auto& row : *rows) {
      if (!row.is_array()) {
        throw Error(Err::Parse, path + ":" + std::to_string(lineno) +
                                    ": row is not an array");
      }
      std::vector<std::string> cells;
      for (const auto& cell : row) {
        if (!cell.is_string()) {
          throw Error(Err::Parse, path + ":" + std::to_string(lineno) +
                                      ": cell is not a string");
        }
        cells.push_back(cell.get<std::string>());
      }
      table.rows.push_back(std::move(cells));
    }
    tables.push_back(std::move(table));
  }
  return tables;
}

std::set<std::string> read_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::Io, "cannot open word list: " + path);
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    for (const auto& w : split_words(line)) words.insert(casefold(w));
  }
  return words;
}

void write_lexicon(const TerminologyLexicon& lexicon,
                   const std::string& terms_path,
                   const std::string& provenance_path) {
  std::ofstream terms(terms_path);
  if (!terms) throw Error(Err::Io, "cannot write " + terms_path);
  for (const auto& term : lexicon.terms) terms << term << '\n';

  json prov = json::object();
  for (const auto& [term, entries] : lexicon.provenance) {
    json list = json::array();
    for (const auto& p : entries) {
      list.push_back({{"doc", p.doc}, {"page", p.page}, {"table", p.table_index}});
    }
    prov[term] = std::move(list);
  }
  std::ofstream sidecar(provenance_path);
  if (!sidecar) throw Error(Err::Io, "cannot write " + provenance_path);
  sidecar << prov.dump(2) << '\n';
}

TerminologyLexicon read_lexicon(const std::string& terms_path,
                                const std::string& provenance_path) {
  std::ifstream in(terms_path);
  if (!in) throw Error(Err::Io, "cannot open lexicon: " + terms_path);
  TerminologyLexicon lexicon;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lexicon.terms.insert(line);
  }
  if (!provenance_path.empty()) {
    std::ifstream sidecar(provenance_path);
    if (sidecar) {
      json prov = json::parse(sidecar, nullptr, false);
      if (!prov.is_discarded() && prov.is_object()) {
        for (const auto& [term, list] : prov.items()) {
          for (const auto& p : list) {
            lexicon.provenance[term].push_back(
                {p.value("doc", ""), p.value("page", 1), p.value("table", 0)});
          }
        }
      }
    }
  }
  return lexicon;
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = {
      "a",    "an",    "and",  "are",  "as",   "at",    "be",    "by",
      "for",  "from",  "has",  "have", "if",   "in",    "is",    "it",
      "its",  "may",   "not",  "of",   "on",   "or",    "shall", "should",
      "that", "the",   "then", "this", "to",   "upon",  "was",   "when",
      "which", "will", "with",
  };
  return words;
}

}  // namespace specmine
