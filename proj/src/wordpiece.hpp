#ifndef SPECMINE_WORDPIECE_HPP
#define SPECMINE_WORDPIECE_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "dataset.hpp"

namespace specmine {

// Label value carried by continuation subwords and special tokens; excluded
// from loss and metrics.
inline constexpr int kIgnoreLabel = -100;

// Greedy longest-match-first subword vocabulary with '##' continuations.
// Single characters (and their '##' forms) are always present, so any word
// seen at build time segments without falling back to [UNK].
class WordPieceVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;

  // Whole words with count >= min_word_freq become single tokens; everything
  // else is covered by character pieces. Deterministic: tokens ordered by
  // frequency, ties broken lexicographically.
  static WordPieceVocab build(
      const std::vector<AnnotatedExample>& corpus, int min_word_freq = 1);

  static WordPieceVocab load(const std::string& path);
  static WordPieceVocab from_tokens(const std::vector<std::string>& tokens);
  void save(const std::string& path) const;

  int id(const std::string& token) const;  // -1 when absent
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
  void push(const std::string& token);
};

class WordPieceTokenizer {
 public:
  explicit WordPieceTokenizer(const WordPieceVocab& vocab) : vocab_(vocab) {}

  // BERT-style greedy segmentation of one word. Words that cannot be
  // segmented (or exceed the char limit) become a single [UNK].
  std::vector<int> encode_word(const std::string& word) const;

  const WordPieceVocab& vocab() const { return vocab_; }

  static constexpr std::size_t kMaxCharsPerWord = 100;

 private:
  const WordPieceVocab& vocab_;
};

// Subword-aligned example ready for the encoder: [CLS] + pieces + [SEP],
// word labels on first subwords, ignore markers elsewhere.
struct ModelReadyExample {
  std::vector<int> subword_ids;
  std::vector<int> attention_mask;           // all ones (no padding)
  std::vector<int> identifier_labels;        // kIgnoreLabel on non-first pieces
  std::vector<int> fp_labels;
  std::vector<int> word_first_subword;       // word index -> subword position
  int gold_relation_id = 0;
  std::string sentence_id;
};

inline constexpr int kDefaultMaxSeqLen = 256;

// Throws Err::TooLong when the subword sequence would exceed max_seq_len.
ModelReadyExample align_to_subwords(const AnnotatedExample& example,
                                    const WordPieceTokenizer& tokenizer,
                                    int max_seq_len = kDefaultMaxSeqLen);

// Inverse alignment: collapses first-subword labels back to word labels.
std::vector<int> collapse_identifier_labels(const ModelReadyExample& example);
std::vector<int> collapse_fp_labels(const ModelReadyExample& example);

}  // namespace specmine

#endif  // SPECMINE_WORDPIECE_HPP
