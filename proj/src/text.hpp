#ifndef SPECMINE_TEXT_HPP
#define SPECMINE_TEXT_HPP

#include <string>
#include <string_view>
#include <vector>

namespace specmine {

// ASCII casefold. Protocol identifiers are ASCII; non-ASCII bytes pass
// through unchanged.
std::string casefold(std::string_view s);

// Strips leading/trailing punctuation while keeping interior characters, so
// camel-case and hyphenated protocol terms survive intact
// ("masterCellGroup," -> "masterCellGroup", "RRC-Setup" -> "RRC-Setup").
std::string strip_outer_punct(std::string_view token);

// Whitespace-splits a table cell and strips outer punctuation from each
// piece. Pieces that are empty after stripping are dropped.
std::vector<std::string> tokenize_cell(std::string_view cell);

// Splits a sentence into whitespace-delimited words (no punctuation
// stripping; surface forms are preserved).
std::vector<std::string> split_words(std::string_view text);

std::string join_words(const std::vector<std::string>& words);

}  // namespace specmine

#endif  // SPECMINE_TEXT_HPP
