#include "text.hpp"

#include <cctype>

namespace specmine {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

// Punctuation stripped from token edges. '=' is kept because it is a
// catalog predicate in its own right.
bool is_edge_punct(unsigned char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '(': case ')': case '[': case ']': case '{': case '}':
    case '"': case '\'': case '`': case '<': case '>': case '|':
    case '/': case '\\': case '*': case '%': case '&': case '#':
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string casefold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

std::string strip_outer_punct(std::string_view token) {
  std::size_t begin = 0;
  std::size_t end = token.size();
  while (begin < end && is_edge_punct(static_cast<unsigned char>(token[begin]))) ++begin;
  while (end > begin && is_edge_punct(static_cast<unsigned char>(token[end - 1]))) --end;
  return std::string(token.substr(begin, end - begin));
}

std::vector<std::string> tokenize_cell(std::string_view cell) {
  std::vector<std::string> out;
  for (const auto& piece : split_words(cell)) {
    std::string stripped = strip_outer_punct(piece);
    if (!stripped.empty()) out.push_back(std::move(stripped));
  }
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

}  // namespace specmine
