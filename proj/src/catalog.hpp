#ifndef SPECMINE_CATALOG_HPP
#define SPECMINE_CATALOG_HPP

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace specmine {

enum class SecurityCategory {
  Confidentiality,
  Integrity,
  Authentication,
  Accounting,
  Belong,
  Generation,
};

const char* category_name(SecurityCategory c);

// The fixed predicate-word catalog: 23 relation words, each mapped to one of
// six security categories. Surviving SRT triples must use one of these words
// (after lemmatization) as their relation.
class PredicateCatalog {
 public:
  static const PredicateCatalog& instance();

  bool contains(std::string_view lemma) const;
  SecurityCategory category(std::string_view lemma) const;  // throws Err::Config if absent

  // Catalog words in a fixed, documented order (category blocks as listed
  // in the expert table).
  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }

 private:
  PredicateCatalog();
  std::vector<std::string> words_;
  std::map<std::string, SecurityCategory, std::less<>> categories_;
};

// Rule-table lemmatizer for relation words. Covers every inflection of the
// 23 catalog predicates ("includes/included/including" -> "include"); any
// other word is returned casefolded and otherwise unchanged.
std::string lemmatize(std::string_view word);

}  // namespace specmine

#endif  // SPECMINE_CATALOG_HPP
