#include "catalog.hpp"

#include <unordered_map>

#include "common.hpp"
#include "text.hpp"

namespace specmine {

const char* category_name(SecurityCategory c) {
  switch (c) {
    case SecurityCategory::Confidentiality: return "Confidentiality";
    case SecurityCategory::Integrity: return "Integrity";
    case SecurityCategory::Authentication: return "Authentication";
    case SecurityCategory::Accounting: return "Accounting";
    case SecurityCategory::Belong: return "Belong";
    case SecurityCategory::Generation: return "Generation";
  }
  return "Unknown";
}

PredicateCatalog::PredicateCatalog() {
  const std::pair<const char*, SecurityCategory> entries[] = {
      {"decode", SecurityCategory::Confidentiality},
      {"encode", SecurityCategory::Confidentiality},
      {"verify", SecurityCategory::Integrity},
      {"access", SecurityCategory::Authentication},
      {"reestablish", SecurityCategory::Authentication},
      {"count", SecurityCategory::Accounting},
      {"build", SecurityCategory::Belong},
      {"complete", SecurityCategory::Belong},
      {"append", SecurityCategory::Belong},
      {"belong", SecurityCategory::Belong},
      {"store", SecurityCategory::Belong},
      {"contain", SecurityCategory::Belong},
      {"include", SecurityCategory::Belong},
      {"combine", SecurityCategory::Belong},
      {"imply", SecurityCategory::Generation},
      {"establish", SecurityCategory::Generation},
      {"modify", SecurityCategory::Generation},
      {"denote", SecurityCategory::Generation},
      {"utilize", SecurityCategory::Generation},
      {"set", SecurityCategory::Generation},
      {"change", SecurityCategory::Generation},
      {"define", SecurityCategory::Generation},
      {"=", SecurityCategory::Generation},
  };
  for (const auto& [word, cat] : entries) {
    words_.emplace_back(word);
    categories_.emplace(word, cat);
  }
}

const PredicateCatalog& PredicateCatalog::instance() {
  static const PredicateCatalog catalog;
  return catalog;
}

bool PredicateCatalog::contains(std::string_view lemma) const {
  return categories_.find(lemma) != categories_.end();
}

SecurityCategory PredicateCatalog::category(std::string_view lemma) const {
  auto it = categories_.find(lemma);
  if (it == categories_.end()) {
    throw Error(Err::Config,
                "predicate not in catalog: " + std::string(lemma));
  }
  return it->second;
}

namespace {

// Inflection -> lemma table for the catalog predicates. Explicit rather than
// generated so each mapping is reviewable; hyphenated "re-establish" forms
// are included because protocol text spells the word both ways.
const std::unordered_map<std::string, std::string>& inflection_table() {
  static const std::unordered_map<std::string, std::string> table = {
      {"decode", "decode"}, {"decodes", "decode"}, {"decoded", "decode"},
      {"decoding", "decode"},
      {"encode", "encode"}, {"encodes", "encode"}, {"encoded", "encode"},
      {"encoding", "encode"},
      {"verify", "verify"}, {"verifies", "verify"}, {"verified", "verify"},
      {"verifying", "verify"},
      {"access", "access"}, {"accesses", "access"}, {"accessed", "access"},
      {"accessing", "access"},
      {"reestablish", "reestablish"}, {"reestablishes", "reestablish"},
      {"reestablished", "reestablish"}, {"reestablishing", "reestablish"},
      {"re-establish", "reestablish"}, {"re-establishes", "reestablish"},
      {"re-established", "reestablish"}, {"re-establishing", "reestablish"},
      {"count", "count"}, {"counts", "count"}, {"counted", "count"},
      {"counting", "count"},
      {"build", "build"}, {"builds", "build"}, {"built", "build"},
      {"building", "build"},
      {"complete", "complete"}, {"completes", "complete"},
      {"completed", "complete"}, {"completing", "complete"},
      {"append", "append"}, {"appends", "append"}, {"appended", "append"},
      {"appending", "append"},
      {"belong", "belong"}, {"belongs", "belong"}, {"belonged", "belong"},
      {"belonging", "belong"},
      {"store", "store"}, {"stores", "store"}, {"stored", "store"},
      {"storing", "store"},
      {"contain", "contain"}, {"contains", "contain"},
      {"contained", "contain"}, {"containing", "contain"},
      {"include", "include"}, {"includes", "include"},
      {"included", "include"}, {"including", "include"},
      {"combine", "combine"}, {"combines", "combine"},
      {"combined", "combine"}, {"combining", "combine"},
      {"imply", "imply"}, {"implies", "imply"}, {"implied", "imply"},
      {"implying", "imply"},
      {"establish", "establish"}, {"establishes", "establish"},
      {"established", "establish"}, {"establishing", "establish"},
      {"modify", "modify"}, {"modifies", "modify"}, {"modified", "modify"},
      {"modifying", "modify"},
      {"denote", "denote"}, {"denotes", "denote"}, {"denoted", "denote"},
      {"denoting", "denote"},
      {"utilize", "utilize"}, {"utilizes", "utilize"},
      {"utilized", "utilize"}, {"utilizing", "utilize"},
      {"set", "set"}, {"sets", "set"}, {"setting", "set"},
      {"change", "change"}, {"changes", "change"}, {"changed", "change"},
      {"changing", "change"},
      {"define", "define"}, {"defines", "define"}, {"defined", "define"},
      {"defining", "define"},
      {"=", "="},
  };
  return table;
}

}  // namespace

std::string lemmatize(std::string_view word) {
  std::string folded = casefold(word);
  const auto& table = inflection_table();
  auto it = table.find(folded);
  if (it != table.end()) return it->second;
  return folded;
}

}  // namespace specmine
