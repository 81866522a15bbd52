#include "wordpiece.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "common.hpp"

namespace specmine {

namespace {

const char* kSpecials[] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};

}  // namespace

void WordPieceVocab::push(const std::string& token) {
  if (ids_.count(token)) return;
  ids_[token] = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
}

WordPieceVocab WordPieceVocab::build(
    const std::vector<AnnotatedExample>& corpus, int min_word_freq) {
  std::map<std::string, int> freq;
  std::set<char> chars;
  for (const auto& example : corpus) {
    for (const auto& word : example.words) {
      freq[word] += 1;
      for (char c : word) chars.insert(c);
    }
  }

  WordPieceVocab vocab;
  for (const char* s : kSpecials) vocab.push(s);

  std::vector<std::pair<int, std::string>> ordered;
  ordered.reserve(freq.size());
  for (const auto& [word, count] : freq) ordered.emplace_back(-count, word);
  std::sort(ordered.begin(), ordered.end());
  for (const auto& [neg_count, word] : ordered) {
    if (-neg_count >= min_word_freq) vocab.push(word);
  }
  for (char c : chars) {
    const std::string piece(1, c);
    vocab.push(piece);
    vocab.push("##" + piece);
  }
  return vocab;
}

WordPieceVocab WordPieceVocab::from_tokens(
    const std::vector<std::string>& tokens) {
  WordPieceVocab vocab;
  for (const auto& token : tokens) vocab.push(token);
  for (int i = 0; i < 4; ++i) {
    if (vocab.size() <= static_cast<std::size_t>(i) ||
        vocab.tokens_[i] != kSpecials[i]) {
      throw Error(Err::Parse, "token list missing special tokens");
    }
  }
  return vocab;
}

WordPieceVocab WordPieceVocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::Io, "cannot open vocab: " + path);
  WordPieceVocab vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) vocab.push(line);
  }
  for (int i = 0; i < 4; ++i) {
    if (vocab.size() <= static_cast<std::size_t>(i) ||
        vocab.tokens_[i] != kSpecials[i]) {
      throw Error(Err::Parse, "vocab missing special tokens: " + path);
    }
  }
  return vocab;
}

void WordPieceVocab::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(Err::Io, "cannot write vocab: " + path);
  for (const auto& token : tokens_) out << token << '\n';
}

int WordPieceVocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? -1 : it->second;
}

const std::string& WordPieceVocab::token(int id) const {
  if (id < 0 || id >= static_cast<int>(tokens_.size())) {
    throw Error(Err::Internal, "vocab id out of range: " + std::to_string(id));
  }
  return tokens_[id];
}

std::vector<int> WordPieceTokenizer::encode_word(const std::string& word) const {
  if (int whole = vocab_.id(word); whole >= 0) return {whole};
  if (word.size() > kMaxCharsPerWord) return {WordPieceVocab::kUnk};

  std::vector<int> pieces;
  std::size_t start = 0;
  while (start < word.size()) {
    std::size_t end = word.size();
    int match = -1;
    while (start < end) {
      std::string sub = word.substr(start, end - start);
      if (start > 0) sub = "##" + sub;
      if (int id = vocab_.id(sub); id >= 0) {
        match = id;
        break;
      }
      --end;
    }
    if (match < 0) return {WordPieceVocab::kUnk};
    pieces.push_back(match);
    start = end;
  }
  return pieces;
}

ModelReadyExample align_to_subwords(const AnnotatedExample& example,
                                    const WordPieceTokenizer& tokenizer,
                                    int max_seq_len) {
  check_example_invariants(example);
  ModelReadyExample out;
  out.sentence_id = example.sentence_id;
  out.gold_relation_id = example.gold_relation_id;

  out.subword_ids.push_back(WordPieceVocab::kCls);
  out.identifier_labels.push_back(kIgnoreLabel);
  out.fp_labels.push_back(kIgnoreLabel);

  for (std::size_t w = 0; w < example.words.size(); ++w) {
    const auto pieces = tokenizer.encode_word(example.words[w]);
    out.word_first_subword.push_back(static_cast<int>(out.subword_ids.size()));
    for (std::size_t p = 0; p < pieces.size(); ++p) {
      out.subword_ids.push_back(pieces[p]);
      out.identifier_labels.push_back(
          p == 0 ? example.identifier_labels[w] : kIgnoreLabel);
      out.fp_labels.push_back(p == 0 ? example.fp_labels[w] : kIgnoreLabel);
    }
  }

  out.subword_ids.push_back(WordPieceVocab::kSep);
  out.identifier_labels.push_back(kIgnoreLabel);
  out.fp_labels.push_back(kIgnoreLabel);
  out.attention_mask.assign(out.subword_ids.size(), 1);

  if (out.subword_ids.size() > static_cast<std::size_t>(max_seq_len)) {
    throw Error(Err::TooLong,
                example.sentence_id + ": " +
                    std::to_string(out.subword_ids.size()) +
                    " subwords exceed max sequence length " +
                    std::to_string(max_seq_len));
  }
  return out;
}

namespace {

std::vector<int> collapse(const ModelReadyExample& example,
                          const std::vector<int>& labels) {
  std::vector<int> out;
  out.reserve(example.word_first_subword.size());
  for (int position : example.word_first_subword) {
    out.push_back(labels[position]);
  }
  return out;
}

}  // namespace

std::vector<int> collapse_identifier_labels(const ModelReadyExample& example) {
  return collapse(example, example.identifier_labels);
}

std::vector<int> collapse_fp_labels(const ModelReadyExample& example) {
  return collapse(example, example.fp_labels);
}

}  // namespace specmine
