#include "model.hpp"

#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "common.hpp"

namespace specmine {

using nlohmann::json;
using nn::Matrix;
using nn::Tape;

EncoderConfig EncoderConfig::tiny() {
  EncoderConfig cfg;
  cfg.num_layers = 2;
  cfg.hidden_dim = 32;
  cfg.num_heads = 4;
  cfg.pretrained_checkpoint = "random";
  return cfg;
}

void EncoderConfig::validate() const {
  if (num_layers < 1) throw Error(Err::Config, "num_layers must be >= 1");
  if (hidden_dim < 1) throw Error(Err::Config, "hidden_dim must be >= 1");
  if (num_heads < 1 || hidden_dim % num_heads != 0) {
    throw Error(Err::Config, "hidden_dim must divide evenly into num_heads");
  }
  if (max_seq_len < 1) throw Error(Err::Config, "max_seq_len must be >= 1");
  if (mlp_ratio < 1) throw Error(Err::Config, "mlp_ratio must be >= 1");
  if (activation != "gelu" && activation != "relu" && activation != "tanh") {
    throw Error(Err::Config, "unknown activation: " + activation);
  }
}

const char* variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::Disjoint: return "disjoint";
    case ModelVariant::Joint1: return "joint1";
    case ModelVariant::Joint2: return "joint2";
  }
  return "?";
}

ModelVariant variant_from_string(const std::string& name) {
  std::string folded;
  for (char c : name) folded.push_back(static_cast<char>(std::tolower(
      static_cast<unsigned char>(c))));
  if (folded == "disjoint") return ModelVariant::Disjoint;
  if (folded == "joint1") return ModelVariant::Joint1;
  if (folded == "joint2") return ModelVariant::Joint2;
  throw Error(Err::Config, "unknown model variant: " + name);
}

namespace {

class GaussianInit {
 public:
  explicit GaussianInit(std::uint64_t seed) : rng_(seed) {}

  Matrix normal(Eigen::Index rows, Eigen::Index cols, double stddev) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = stddev * gauss();
    }
    return m;
  }

 private:
  double gauss() {
    double u1 = draw_unit(rng_);
    while (u1 <= 0.0) u1 = draw_unit(rng_);
    const double u2 = draw_unit(rng_);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }
  std::mt19937_64 rng_;
};

constexpr double kInitStd = 0.02;

}  // namespace

JointModel::JointModel(EncoderConfig cfg, ModelVariant variant,
                       int vocab_size, std::uint64_t init_seed)
    : cfg_(std::move(cfg)), variant_(variant), vocab_size_(vocab_size) {
  cfg_.validate();
  if (vocab_size_ < 5) {
    throw Error(Err::Config, "vocabulary too small for the encoder");
  }
  GaussianInit init(init_seed);
  const int hidden = cfg_.hidden_dim;
  const int mlp = hidden * cfg_.mlp_ratio;

  auto weight = [&](const std::string& name, int rows, int cols) {
    params_.push_back({name, init.normal(rows, cols, kInitStd)});
  };
  auto zeros = [&](const std::string& name, int cols) {
    params_.push_back({name, Matrix::Zero(1, cols)});
  };
  auto ones = [&](const std::string& name, int cols) {
    params_.push_back({name, Matrix::Ones(1, cols)});
  };

  weight("tok_emb.weight", vocab_size_, hidden);
  weight("pos_emb.weight", cfg_.max_seq_len, hidden);
  for (int i = 0; i < cfg_.num_layers; ++i) {
    const std::string p = "h" + std::to_string(i) + ".";
    ones(p + "ln_1.weight", hidden);
    zeros(p + "ln_1.bias", hidden);
    weight(p + "attn.wq.weight", hidden, hidden);
    zeros(p + "attn.wq.bias", hidden);
    weight(p + "attn.wk.weight", hidden, hidden);
    zeros(p + "attn.wk.bias", hidden);
    weight(p + "attn.wv.weight", hidden, hidden);
    zeros(p + "attn.wv.bias", hidden);
    weight(p + "attn.wo.weight", hidden, hidden);
    zeros(p + "attn.wo.bias", hidden);
    ones(p + "ln_2.weight", hidden);
    zeros(p + "ln_2.bias", hidden);
    weight(p + "mlp.fc_in.weight", hidden, mlp);
    zeros(p + "mlp.fc_in.bias", mlp);
    weight(p + "mlp.fc_out.weight", mlp, hidden);
    zeros(p + "mlp.fc_out.bias", hidden);
  }
  ones("ln_f.weight", hidden);
  zeros("ln_f.bias", hidden);

  weight("idf_head.fc1.weight", hidden, hidden);
  zeros("idf_head.fc1.bias", hidden);
  weight("idf_head.fc2.weight", hidden, IdentifierLabelMap::kNumLabels);
  zeros("idf_head.fc2.bias", IdentifierLabelMap::kNumLabels);

  weight("fp_head.fc1.weight", fp_head_input_width(), hidden);
  zeros("fp_head.fc1.bias", hidden);
  weight("fp_head.fc2.weight", hidden, FormalPropertyLabelMap::kNumLabels);
  zeros("fp_head.fc2.bias", FormalPropertyLabelMap::kNumLabels);
}

int fp_head_input_width(const EncoderConfig& cfg, ModelVariant variant) {
  switch (variant) {
    case ModelVariant::Disjoint: return cfg.hidden_dim;
    case ModelVariant::Joint1: return IdentifierLabelMap::kNumLabels;
    case ModelVariant::Joint2:
      return cfg.hidden_dim + IdentifierLabelMap::kNumLabels;
  }
  throw Error(Err::Internal, "unreachable variant");
}

int JointModel::fp_head_input_width() const {
  return specmine::fp_head_input_width(cfg_, variant_);
}

const Matrix& JointModel::param(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p.value;
  }
  throw Error(Err::Internal, "no parameter named " + name);
}

Matrix& JointModel::mutable_param(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p.value;
  }
  throw Error(Err::Internal, "no parameter named " + name);
}

bool JointModel::is_head_param(const std::string& name) {
  return name.rfind("idf_head.", 0) == 0 || name.rfind("fp_head.", 0) == 0;
}

bool JointModel::is_identifier_head_param(const std::string& name) {
  return name.rfind("idf_head.", 0) == 0;
}

void JointModel::bind_params(Graph& g) const {
  if (!g.params.empty()) return;
  g.params.reserve(params_.size());
  for (const auto& p : params_) g.params.push_back(g.tape.leaf(p.value));
}

Tape::Var JointModel::param_var(const Graph& g,
                                const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return g.params[i];
  }
  throw Error(Err::Internal, "no parameter named " + name);
}

Tape::Var JointModel::activation(Graph& g, Tape::Var x) const {
  if (cfg_.activation == "relu") return g.tape.relu(x);
  if (cfg_.activation == "tanh") return g.tape.tanh(x);
  return g.tape.gelu(x);
}

Tape::Var JointModel::mlp2(Graph& g, Tape::Var input,
                           const std::string& prefix) const {
  Tape& t = g.tape;
  Tape::Var h = t.add_rowvec(t.matmul(input, param_var(g, prefix + ".fc1.weight")),
                             param_var(g, prefix + ".fc1.bias"));
  h = activation(g, h);
  return t.add_rowvec(t.matmul(h, param_var(g, prefix + ".fc2.weight")),
                      param_var(g, prefix + ".fc2.bias"));
}

Tape::Var JointModel::encode(Graph& g, const std::vector<int>& ids) const {
  if (ids.empty()) {
    throw Error(Err::SequenceTooLong, "encode: empty subword sequence");
  }
  if (static_cast<int>(ids.size()) > cfg_.max_seq_len) {
    throw Error(Err::SequenceTooLong,
                "sequence of " + std::to_string(ids.size()) +
                    " subwords exceeds max_seq_len " +
                    std::to_string(cfg_.max_seq_len));
  }
  bind_params(g);
  Tape& t = g.tape;

  std::vector<int> positions(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) positions[i] = static_cast<int>(i);
  Tape::Var x = t.add(t.embedding_rows(param_var(g, "tok_emb.weight"), ids),
                      t.embedding_rows(param_var(g, "pos_emb.weight"), positions));

  const int hidden = cfg_.hidden_dim;
  const int heads = cfg_.num_heads;
  const int head_dim = hidden / heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  for (int layer = 0; layer < cfg_.num_layers; ++layer) {
    const std::string p = "h" + std::to_string(layer) + ".";
    // Pre-norm attention block with residual.
    Tape::Var normed = t.layer_norm_rows(x, param_var(g, p + "ln_1.weight"),
                                         param_var(g, p + "ln_1.bias"));
    Tape::Var q = t.add_rowvec(t.matmul(normed, param_var(g, p + "attn.wq.weight")),
                               param_var(g, p + "attn.wq.bias"));
    Tape::Var k = t.add_rowvec(t.matmul(normed, param_var(g, p + "attn.wk.weight")),
                               param_var(g, p + "attn.wk.bias"));
    Tape::Var v = t.add_rowvec(t.matmul(normed, param_var(g, p + "attn.wv.weight")),
                               param_var(g, p + "attn.wv.bias"));
    Tape::Var context;
    for (int h = 0; h < heads; ++h) {
      Tape::Var qh = t.slice_cols(q, h * head_dim, head_dim);
      Tape::Var kh = t.slice_cols(k, h * head_dim, head_dim);
      Tape::Var vh = t.slice_cols(v, h * head_dim, head_dim);
      Tape::Var scores = t.scale(t.matmul_nt(qh, kh), att_scale);
      Tape::Var weights = t.softmax_rows(scores);
      Tape::Var ctx = t.matmul(weights, vh);
      context = h == 0 ? ctx : t.concat_cols(context, ctx);
    }
    Tape::Var attn_out =
        t.add_rowvec(t.matmul(context, param_var(g, p + "attn.wo.weight")),
                     param_var(g, p + "attn.wo.bias"));
    x = t.add(x, attn_out);

    // Pre-norm MLP block with residual.
    Tape::Var normed2 = t.layer_norm_rows(x, param_var(g, p + "ln_2.weight"),
                                          param_var(g, p + "ln_2.bias"));
    Tape::Var ff =
        t.add_rowvec(t.matmul(normed2, param_var(g, p + "mlp.fc_in.weight")),
                     param_var(g, p + "mlp.fc_in.bias"));
    ff = activation(g, ff);
    ff = t.add_rowvec(t.matmul(ff, param_var(g, p + "mlp.fc_out.weight")),
                      param_var(g, p + "mlp.fc_out.bias"));
    x = t.add(x, ff);
  }
  return t.layer_norm_rows(x, param_var(g, "ln_f.weight"),
                           param_var(g, "ln_f.bias"));
}

Tape::Var JointModel::idf_head(Graph& g, Tape::Var hidden) const {
  return mlp2(g, hidden, "idf_head");
}

Tape::Var JointModel::fp_head(Graph& g, Tape::Var hidden,
                              Tape::Var idf_logits) const {
  Tape::Var input;
  switch (variant_) {
    case ModelVariant::Disjoint:
      input = hidden;
      break;
    case ModelVariant::Joint1:
      input = idf_logits;
      break;
    case ModelVariant::Joint2:
      input = g.tape.concat_cols(hidden, idf_logits);
      break;
  }
  const auto width = g.tape.value(input).cols();
  if (width != fp_head_input_width()) {
    throw Error(Err::ShapeMismatch,
                "fp head expects input width " +
                    std::to_string(fp_head_input_width()) + ", got " +
                    std::to_string(width));
  }
  return mlp2(g, input, "fp_head");
}

JointModel::Graph JointModel::forward(const std::vector<int>& ids) const {
  Graph g;
  g.hidden = encode(g, ids);
  g.idf_logits = idf_head(g, g.hidden);
  g.fp_logits = fp_head(g, g.hidden, g.idf_logits);
  return g;
}

std::vector<int> predict_labels(const Matrix& logits) {
  if (!logits.allFinite()) {
    throw Error(Err::Divergence, "non-finite logits in predict");
  }
  return nn::argmax_rows(logits);
}

LossBreakdown combined_loss(Tape& tape, Tape::Var idf_logits,
                            Tape::Var fp_logits,
                            const std::vector<int>& gold_idf,
                            const std::vector<int>& gold_fp,
                            double fp_weight) {
  LossBreakdown out;
  int idf_count = 0;
  int fp_count = 0;
  Tape::Var idf_sum = tape.cross_entropy_sum(idf_logits, gold_idf, &idf_count);
  Tape::Var fp_sum = tape.cross_entropy_sum(fp_logits, gold_fp, &fp_count);
  if (idf_count == 0 || fp_count == 0) {
    throw Error(Err::AllIgnored, "no scorable positions for loss");
  }
  out.identifier = tape.scale(idf_sum, 1.0 / idf_count);
  out.fp = tape.scale(fp_sum, 1.0 / fp_count);
  out.total = tape.add(out.identifier, tape.scale(out.fp, fp_weight));
  out.identifier_scorable = idf_count;
  out.fp_scorable = fp_count;
  return out;
}

namespace {

json encoder_to_json(const EncoderConfig& cfg) {
  return json{{"num_layers", cfg.num_layers},
              {"hidden_dim", cfg.hidden_dim},
              {"num_heads", cfg.num_heads},
              {"mlp_ratio", cfg.mlp_ratio},
              {"max_seq_len", cfg.max_seq_len},
              {"pretrained_checkpoint", cfg.pretrained_checkpoint},
              {"freeze_encoder", cfg.freeze_encoder},
              {"activation", cfg.activation}};
}

EncoderConfig encoder_from_json(const json& j) {
  EncoderConfig cfg;
  cfg.num_layers = j.value("num_layers", cfg.num_layers);
  cfg.hidden_dim = j.value("hidden_dim", cfg.hidden_dim);
  cfg.num_heads = j.value("num_heads", cfg.num_heads);
  cfg.mlp_ratio = j.value("mlp_ratio", cfg.mlp_ratio);
  cfg.max_seq_len = j.value("max_seq_len", cfg.max_seq_len);
  cfg.pretrained_checkpoint =
      j.value("pretrained_checkpoint", cfg.pretrained_checkpoint);
  cfg.freeze_encoder = j.value("freeze_encoder", cfg.freeze_encoder);
  cfg.activation = j.value("activation", cfg.activation);
  return cfg;
}

constexpr char kMagic[8] = {'S', 'M', 'C', 'K', '0', '0', '0', '1'};

template <typename T>
void write_pod(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

void save_checkpoint(const std::string& path, const JointModel& model,
                     const WordPieceVocab& vocab,
                     const FormalPropertyLabelMap& fp_map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Err::Io, "cannot write checkpoint: " + path);

  json header;
  header["encoder"] = encoder_to_json(model.config());
  header["variant"] = variant_name(model.variant());
  json vocab_json = json::array();
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    vocab_json.push_back(vocab.token(static_cast<int>(i)));
  }
  header["vocab"] = std::move(vocab_json);
  json fp_json = json::object();
  for (const auto& [word, id] : fp_map.entries()) fp_json[word] = id;
  header["fp_map"] = std::move(fp_json);
  const std::string header_str = header.dump();

  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint64_t>(out, header_str.size());
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  write_pod<std::uint64_t>(out, model.params().size());
  for (const auto& p : model.params()) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(p.value.rows()));
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(p.value.cols()));
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
        write_pod<double>(out, p.value(i, j));
      }
    }
  }
  if (!out) throw Error(Err::Io, "failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Err::Io, "cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(Err::Parse, "not a checkpoint file: " + path);
  }
  const auto header_len = read_pod<std::uint64_t>(in);
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  json header = json::parse(header_str, nullptr, false);
  if (header.is_discarded()) {
    throw Error(Err::Parse, "corrupt checkpoint header: " + path);
  }

  Checkpoint ckpt;
  ckpt.encoder = encoder_from_json(header.at("encoder"));
  ckpt.variant = variant_from_string(header.at("variant").get<std::string>());
  for (const auto& token : header.at("vocab")) {
    ckpt.vocab_tokens.push_back(token.get<std::string>());
  }
  for (const auto& [word, id] : header.at("fp_map").items()) {
    ckpt.fp_entries[word] = id.get<int>();
  }

  const auto n_params = read_pod<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < n_params; ++i) {
    const auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rows = read_pod<std::uint64_t>(in);
    const auto cols = read_pod<std::uint64_t>(in);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::uint64_t r = 0; r < rows; ++r) {
      for (std::uint64_t c = 0; c < cols; ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            read_pod<double>(in);
      }
    }
    if (!in) throw Error(Err::Parse, "truncated checkpoint: " + path);
    ckpt.params.push_back({std::move(name), std::move(m)});
  }
  return ckpt;
}

JointModel model_from_checkpoint(const Checkpoint& ckpt) {
  JointModel model(ckpt.encoder, ckpt.variant,
                   static_cast<int>(ckpt.vocab_tokens.size()), 0);
  if (ckpt.params.size() != model.params().size()) {
    throw Error(Err::Parse, "checkpoint parameter count mismatch");
  }
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    auto& dst = model.mutable_params()[i];
    const auto& src = ckpt.params[i];
    if (src.name != dst.name || src.value.rows() != dst.value.rows() ||
        src.value.cols() != dst.value.cols()) {
      throw Error(Err::Parse, "checkpoint parameter mismatch at " + src.name);
    }
    dst.value = src.value;
  }
  return model;
}

}  // namespace specmine
