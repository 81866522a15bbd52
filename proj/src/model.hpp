#ifndef SPECMINE_MODEL_HPP
#define SPECMINE_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "tape.hpp"
#include "wordpiece.hpp"

namespace specmine {

struct EncoderConfig {
  int num_layers = 12;
  int hidden_dim = 768;
  int num_heads = 12;
  int mlp_ratio = 4;
  int max_seq_len = 256;
  // "random" initializes from the seed; a path loads a saved checkpoint.
  // External pretrained names (e.g. bert-base-cased) require a converted
  // checkpoint file; see the README runbook.
  std::string pretrained_checkpoint = "bert-base-cased";
  bool freeze_encoder = false;
  std::string activation = "gelu";  // gelu | relu | tanh

  // Desk-scale configuration used by the test and acceptance suites.
  static EncoderConfig tiny();

  void validate() const;
};

enum class ModelVariant { Disjoint, Joint1, Joint2 };

const char* variant_name(ModelVariant v);
ModelVariant variant_from_string(const std::string& name);

// Width of the formal-property head's input under each wiring:
// hidden_dim, 3, or hidden_dim + 3.
int fp_head_input_width(const EncoderConfig& cfg, ModelVariant variant);

struct NamedParam {
  std::string name;
  nn::Matrix value;
};

// Sequence encoder with an identifier head and a formal-property head.
// Identifier logits have 3 classes; formal-property logits have 24. The
// variants differ only in what feeds the formal-property head:
//   Disjoint: hidden states H              (heads independent)
//   Joint1:   identifier logits I'         (no sentence context)
//   Joint2:   concat(H, I')                (context plus identifier logits)
class JointModel {
 public:
  JointModel(EncoderConfig cfg, ModelVariant variant, int vocab_size,
             std::uint64_t init_seed);

  struct Graph {
    nn::Tape tape;
    std::vector<nn::Tape::Var> params;  // aligned with JointModel::params()
    nn::Tape::Var hidden;
    nn::Tape::Var idf_logits;
    nn::Tape::Var fp_logits;
  };

  // Builds the full forward graph for one subword sequence.
  Graph forward(const std::vector<int>& subword_ids) const;

  // Stage entry points (tests exercise the wiring through these).
  nn::Tape::Var encode(Graph& g, const std::vector<int>& subword_ids) const;
  nn::Tape::Var idf_head(Graph& g, nn::Tape::Var hidden) const;
  nn::Tape::Var fp_head(Graph& g, nn::Tape::Var hidden,
                        nn::Tape::Var idf_logits) const;

  // Registers every parameter as a tape leaf; forward()/encode() call this,
  // tests may call it to build custom graphs.
  void bind_params(Graph& g) const;

  const std::vector<NamedParam>& params() const { return params_; }
  std::vector<NamedParam>& mutable_params() { return params_; }
  const nn::Matrix& param(const std::string& name) const;
  nn::Matrix& mutable_param(const std::string& name);

  static bool is_head_param(const std::string& name);
  static bool is_identifier_head_param(const std::string& name);

  const EncoderConfig& config() const { return cfg_; }
  ModelVariant variant() const { return variant_; }
  int vocab_size() const { return vocab_size_; }
  int fp_head_input_width() const;

 private:
  nn::Tape::Var mlp2(Graph& g, nn::Tape::Var input, const std::string& prefix) const;
  nn::Tape::Var activation(Graph& g, nn::Tape::Var x) const;
  nn::Tape::Var param_var(const Graph& g, const std::string& name) const;

  EncoderConfig cfg_;
  ModelVariant variant_;
  int vocab_size_;
  std::vector<NamedParam> params_;
};

// Per-position argmax of softmax (equal to argmax of the raw logits).
std::vector<int> predict_labels(const nn::Matrix& logits);

struct LossBreakdown {
  nn::Tape::Var total;        // identifier CE + fp_weight * fp CE
  nn::Tape::Var identifier;   // mean over scorable positions
  nn::Tape::Var fp;
  int identifier_scorable = 0;
  int fp_scorable = 0;
};

// Token-level cross-entropy on both heads, equal weights by default.
// Positions labeled kIgnoreLabel are excluded; throws Err::AllIgnored when a
// head has no scorable position. fp_weight is a debug knob (0 reduces the
// loss to the identifier term alone).
LossBreakdown combined_loss(nn::Tape& tape, nn::Tape::Var idf_logits,
                            nn::Tape::Var fp_logits,
                            const std::vector<int>& gold_idf,
                            const std::vector<int>& gold_fp,
                            double fp_weight = 1.0);

struct Checkpoint {
  EncoderConfig encoder;
  ModelVariant variant = ModelVariant::Disjoint;
  std::vector<std::string> vocab_tokens;
  std::map<std::string, int> fp_entries;
  std::vector<NamedParam> params;
};

void save_checkpoint(const std::string& path, const JointModel& model,
                     const WordPieceVocab& vocab,
                     const FormalPropertyLabelMap& fp_map);
Checkpoint load_checkpoint(const std::string& path);
JointModel model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace specmine

#endif  // SPECMINE_MODEL_HPP
