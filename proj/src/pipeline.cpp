#include "pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "dataset.hpp"
#include "export.hpp"
#include "ingest.hpp"
#include "model.hpp"
#include "srt.hpp"
#include "text.hpp"
#include "train.hpp"
#include "wordpiece.hpp"

namespace specmine {

namespace fs = std::filesystem;
using nlohmann::json;

const std::map<std::string, std::string>& PipelineConfig::defaults() {
  static const std::map<std::string, std::string> table = {
      {"tables", ""},
      {"sentences", ""},
      {"out_dir", "out"},
      {"stopwords", ""},
      {"domain_exclude", ""},
      {"split_cell_phrases", "true"},
      {"backend", "fixture"},
      {"backend_endpoint", "http://127.0.0.1:9000"},
      {"backend_fixtures", ""},
      {"fallback_patterns", "false"},
      {"max_words", "200"},
      {"max_seq_len", "256"},
      {"valid_fraction", "0.2"},
      {"seed", "1"},
      {"variant", "joint2"},
      {"tiny", "false"},
      {"num_layers", "12"},
      {"hidden_dim", "768"},
      {"num_heads", "12"},
      {"mlp_ratio", "4"},
      {"checkpoint", "bert-base-cased"},
      {"freeze_encoder", "false"},
      {"activation", "gelu"},
      {"learning_rate", "1e-4"},
      {"epochs", "20"},
      {"weight_decay", "0.1"},
      {"no_regularization", "bias,ln_1,ln_2"},
      {"batch_size", "16"},
      {"fp_loss_weight", "1.0"},
      {"fprop_any_position", "false"},
      {"vocab_min_freq", "1"},
      {"synth_examples", "500"},
      {"synth_identifiers", "40"},
      {"synth_min_words", "8"},
      {"synth_max_words", "40"},
      {"synth_predicates", "include:620,contain:327,utilize:10"},
      {"export_format", "csv"},
      {"export_mode", "gold"},
      {"eval_split", "valid"},
      {"model_path", ""},
      {"lexicon", ""},
      {"triples", ""},
      {"dataset_dir", ""},
      {"verbose", "false"},
  };
  return table;
}

PipelineConfig::PipelineConfig() = default;

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (!defaults().count(key)) {
    throw Error(Err::Config, "unknown config key: " + key);
  }
  values_[key] = value;
}

void PipelineConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::Io, "cannot open config: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string& trimmed = line;
    auto first = trimmed.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (trimmed[first] == '#') continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw Error(Err::Config,
                  path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    auto strip = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string()
                                    : s.substr(b, e - b + 1);
    };
    set(strip(trimmed.substr(0, eq)), strip(trimmed.substr(eq + 1)));
  }
}

bool PipelineConfig::is_set(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string PipelineConfig::get(const std::string& key) const {
  if (key == "backend_endpoint") {
    if (const char* env = std::getenv("SPECMINE_BACKEND_ENDPOINT")) {
      return env;
    }
  }
  auto it = values_.find(key);
  if (it != values_.end()) return it->second;

  // Desk-scale profile for keys the user left untouched.
  auto def = defaults().find(key);
  if (def == defaults().end()) {
    throw Error(Err::Config, "unknown config key: " + key);
  }
  bool tiny = false;
  if (auto t = values_.find("tiny"); t != values_.end()) {
    tiny = t->second == "true" || t->second == "1";
  }
  if (tiny) {
    static const std::map<std::string, std::string> tiny_profile = {
        {"num_layers", "2"},   {"hidden_dim", "32"},
        {"num_heads", "4"},    {"checkpoint", "random"},
        {"learning_rate", "3e-3"},
    };
    if (auto p = tiny_profile.find(key); p != tiny_profile.end()) {
      return p->second;
    }
  }
  return def->second;
}

long PipelineConfig::get_int(const std::string& key) const {
  try {
    return std::stol(get(key));
  } catch (const std::exception&) {
    throw Error(Err::Config, "config key " + key + " is not an integer");
  }
}

double PipelineConfig::get_double(const std::string& key) const {
  try {
    return std::stod(get(key));
  } catch (const std::exception&) {
    throw Error(Err::Config, "config key " + key + " is not a number");
  }
}

bool PipelineConfig::get_bool(const std::string& key) const {
  const std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(Err::Config, "config key " + key + " is not a boolean");
}

std::string PipelineConfig::config_hash() const {
  std::string canonical;
  for (const auto& [key, unused] : defaults()) {
    canonical += key;
    canonical += '=';
    canonical += get(key);
    canonical += '\n';
  }
  return to_hex(fnv1a(canonical));
}

namespace {

void log_warn(const std::string& message) {
  std::cerr << "[specmine] warning: " << message << '\n';
}

fs::path ensure_out_dir(const PipelineConfig& cfg) {
  fs::path dir(cfg.get("out_dir"));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Err::Io, "cannot create out_dir: " + dir.string());
  return dir;
}

void write_manifest(const PipelineConfig& cfg, const std::string& stage,
                    const StageCounts& counts,
                    const std::vector<std::string>& artifacts,
                    const std::string& label_map_hash = "") {
  json j;
  j["stage"] = stage;
  j["config_hash"] = cfg.config_hash();
  j["seed"] = cfg.get_int("seed");
  j["label_map_hash"] = label_map_hash;
  json c = json::object();
  for (const auto& [key, value] : counts.values) c[key] = value;
  j["counts"] = std::move(c);
  j["artifacts"] = artifacts;
  const fs::path path = fs::path(cfg.get("out_dir")) / (stage + "_manifest.json");
  std::ofstream out(path);
  if (!out) throw Error(Err::Io, "cannot write manifest: " + path.string());
  out << j.dump(2) << '\n';
}

json read_manifest(const fs::path& dir, const std::string& stage) {
  const fs::path path = dir / (stage + "_manifest.json");
  std::ifstream in(path);
  if (!in) {
    throw Error(Err::State, "missing " + path.string() +
                                "; run the " + stage + " stage first");
  }
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw Error(Err::Parse, "corrupt manifest: " + path.string());
  }
  return j;
}

FilterConfig filter_config_from(const PipelineConfig& cfg) {
  FilterConfig fc;
  fc.split_cell_phrases = cfg.get_bool("split_cell_phrases");
  const std::string stopwords = cfg.get("stopwords");
  fc.stop_list = stopwords.empty() ? default_stopwords()
                                   : read_word_list(stopwords);
  const std::string exclude = cfg.get("domain_exclude");
  if (!exclude.empty()) fc.domain_exclude_list = read_word_list(exclude);
  fc.stop_list.erase("");
  fc.domain_exclude_list.erase("");
  return fc;
}

std::string lexicon_path(const PipelineConfig& cfg) {
  const std::string explicit_path = cfg.get("lexicon");
  if (!explicit_path.empty()) return explicit_path;
  return (fs::path(cfg.get("out_dir")) / "lexicon.txt").string();
}

std::string triples_path(const PipelineConfig& cfg) {
  const std::string explicit_path = cfg.get("triples");
  if (!explicit_path.empty()) return explicit_path;
  return (fs::path(cfg.get("out_dir")) / "triples.jsonl").string();
}

fs::path dataset_dir(const PipelineConfig& cfg) {
  const std::string explicit_dir = cfg.get("dataset_dir");
  if (!explicit_dir.empty()) return fs::path(explicit_dir);
  return fs::path(cfg.get("out_dir"));
}

EncoderConfig encoder_config_from(const PipelineConfig& cfg) {
  EncoderConfig ec;
  ec.num_layers = static_cast<int>(cfg.get_int("num_layers"));
  ec.hidden_dim = static_cast<int>(cfg.get_int("hidden_dim"));
  ec.num_heads = static_cast<int>(cfg.get_int("num_heads"));
  ec.mlp_ratio = static_cast<int>(cfg.get_int("mlp_ratio"));
  ec.max_seq_len = static_cast<int>(cfg.get_int("max_seq_len"));
  ec.pretrained_checkpoint = cfg.get("checkpoint");
  ec.freeze_encoder = cfg.get_bool("freeze_encoder");
  ec.activation = cfg.get("activation");
  ec.validate();
  return ec;
}

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char c : text) {
    if (c == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else if (c != ' ') {
      item.push_back(c);
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

TrainConfig train_config_from(const PipelineConfig& cfg) {
  TrainConfig tc;
  tc.learning_rate = cfg.get_double("learning_rate");
  tc.epochs = static_cast<int>(cfg.get_int("epochs"));
  tc.weight_decay = cfg.get_double("weight_decay");
  tc.no_regularization_names = split_csv_list(cfg.get("no_regularization"));
  tc.batch_size = static_cast<int>(cfg.get_int("batch_size"));
  tc.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  tc.fp_loss_weight = cfg.get_double("fp_loss_weight");
  tc.fprop_any_position = cfg.get_bool("fprop_any_position");
  tc.validate();
  return tc;
}

struct PreparedDataset {
  std::vector<AnnotatedExample> train;
  std::vector<AnnotatedExample> valid;
  WordPieceVocab vocab;
  FormalPropertyLabelMap fp_map;
};

PreparedDataset load_prepared_dataset(const PipelineConfig& cfg) {
  const fs::path dir = dataset_dir(cfg);
  PreparedDataset out{
      read_examples_jsonl((dir / "train.jsonl").string()),
      read_examples_jsonl((dir / "valid.jsonl").string()),
      WordPieceVocab::load((dir / "vocab.txt").string()),
      FormalPropertyLabelMap::load((dir / "fp_label_map.json").string())};
  return out;
}

std::vector<ModelReadyExample> align_all(
    const std::vector<AnnotatedExample>& examples,
    const WordPieceTokenizer& tokenizer, int max_seq_len, long* dropped) {
  std::vector<ModelReadyExample> out;
  out.reserve(examples.size());
  for (const auto& e : examples) {
    try {
      out.push_back(align_to_subwords(e, tokenizer, max_seq_len));
    } catch (const Error& err) {
      if (err.code() != Err::TooLong) throw;
      if (dropped) ++*dropped;
      log_warn(std::string(err.what()) + " (dropped)");
    }
  }
  return out;
}

// Shared tail of build-dataset and synth: vocab, alignment screening,
// split, artifact writing.
StageCounts finalize_dataset(const PipelineConfig& cfg,
                             const std::string& stage,
                             std::vector<AnnotatedExample> annotated,
                             FormalPropertyLabelMap& fp_map,
                             StageCounts counts) {
  const fs::path dir = ensure_out_dir(cfg);
  const auto max_words = static_cast<std::size_t>(cfg.get_int("max_words"));
  const int max_seq_len = static_cast<int>(cfg.get_int("max_seq_len"));

  auto kept = length_filter(annotated, max_words);
  counts.values["length_filtered"] = static_cast<long>(kept.size());

  fp_map.complete_from_catalog();
  auto vocab = WordPieceVocab::build(
      kept, static_cast<int>(cfg.get_int("vocab_min_freq")));
  WordPieceTokenizer tokenizer(vocab);

  // Screen out anything that cannot be aligned within the sequence budget.
  std::vector<AnnotatedExample> aligned;
  long too_long = 0;
  for (const auto& e : kept) {
    try {
      align_to_subwords(e, tokenizer, max_seq_len);
      aligned.push_back(e);
    } catch (const Error& err) {
      if (err.code() != Err::TooLong) throw;
      ++too_long;
      log_warn(std::string(err.what()) + " (dropped)");
    }
  }
  counts.values["too_long_dropped"] = too_long;
  counts.values["final_examples"] = static_cast<long>(aligned.size());

  auto [train, valid] = split_dataset(
      aligned, cfg.get_double("valid_fraction"),
      static_cast<std::uint64_t>(cfg.get_int("seed")));
  counts.values["train_examples"] = static_cast<long>(train.size());
  counts.values["valid_examples"] = static_cast<long>(valid.size());

  write_examples_jsonl(aligned, (dir / "dataset.jsonl").string());
  write_examples_jsonl(train, (dir / "train.jsonl").string());
  write_examples_jsonl(valid, (dir / "valid.jsonl").string());
  vocab.save((dir / "vocab.txt").string());
  fp_map.save((dir / "fp_label_map.json").string());

  write_manifest(cfg, stage, counts,
                 {"dataset.jsonl", "train.jsonl", "valid.jsonl", "vocab.txt",
                  "fp_label_map.json"},
                 to_hex(fp_map.hash()));
  return counts;
}

JointModel build_or_load_model(const PipelineConfig& cfg,
                               const EncoderConfig& encoder,
                               ModelVariant variant, int vocab_size) {
  const std::string checkpoint = encoder.pretrained_checkpoint;
  if (checkpoint == "random" || checkpoint == "tiny-random") {
    return JointModel(encoder, variant, vocab_size,
                      static_cast<std::uint64_t>(cfg.get_int("seed")));
  }
  if (fs::exists(checkpoint)) {
    Checkpoint ckpt = load_checkpoint(checkpoint);
    if (ckpt.variant != variant) {
      throw Error(Err::Config,
                  std::string("checkpoint variant is ") +
                      variant_name(ckpt.variant) + ", requested " +
                      variant_name(variant));
    }
    return model_from_checkpoint(ckpt);
  }
  throw Error(Err::Config,
              "pretrained checkpoint '" + checkpoint +
                  "' is not bundled with this repository; use "
                  "checkpoint=random or point to a converted .smck file "
                  "(see the README runbook)");
}

}  // namespace

StageCounts run_ingest(const PipelineConfig& cfg) {
  const fs::path dir = ensure_out_dir(cfg);
  const std::string tables_path = cfg.get("tables");
  if (tables_path.empty()) {
    throw Error(Err::Config, "ingest requires tables=<path>");
  }
  const auto tables = read_tables_jsonl(tables_path);
  const FilterConfig fc = filter_config_from(cfg);
  const auto candidates = collect_table_terms(tables, fc);
  const auto lexicon = hierarchical_filter(candidates, fc);

  write_lexicon(lexicon, (dir / "lexicon.txt").string(),
                (dir / "lexicon_provenance.json").string());

  StageCounts counts;
  counts.values["tables"] = static_cast<long>(tables.size());
  counts.values["candidate_tokens"] = static_cast<long>(candidates.total());
  counts.values["candidate_types"] = static_cast<long>(candidates.distinct());
  counts.values["terms"] = static_cast<long>(lexicon.terms.size());
  write_manifest(cfg, "ingest", counts,
                 {"lexicon.txt", "lexicon_provenance.json"});
  return counts;
}

StageCounts run_extract(const PipelineConfig& cfg) {
  const fs::path dir = ensure_out_dir(cfg);
  const std::string sentences_path = cfg.get("sentences");
  if (sentences_path.empty()) {
    throw Error(Err::Config, "extract requires sentences=<path>");
  }
  std::ifstream in(sentences_path);
  if (!in) throw Error(Err::Io, "cannot open sentences: " + sentences_path);

  const auto lexicon = read_lexicon(lexicon_path(cfg));
  auto backend = make_backend(cfg.get("backend"), cfg.get("backend_endpoint"),
                              cfg.get("backend_fixtures"));
  ExtractOptions opts;
  opts.enable_fallback_patterns = cfg.get_bool("fallback_patterns");

  std::vector<SRTTriple> raw;
  long sentences = 0;
  long parsed_ok = 0;
  long parse_failures = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++sentences;
    char id_buf[16];
    std::snprintf(id_buf, sizeof(id_buf), "s%04d", lineno);
    const std::string sentence_id = id_buf;
    try {
      ParsedSentence parsed = parse_dependencies(sentence_id, line, *backend);
      ++parsed_ok;
      auto triples = extract_srt(parsed, opts);
      raw.insert(raw.end(), triples.begin(), triples.end());
    } catch (const Error& err) {
      if (err.code() != Err::BackendUnavailable &&
          err.code() != Err::ParseFailure) {
        throw;
      }
      ++parse_failures;
      log_warn(sentence_id + ": " + err.what());
    }
  }

  const auto lexicon_kept = filter_by_lexicon(raw, lexicon);
  const auto predicate_kept =
      filter_by_predicate(lexicon_kept, PredicateCatalog::instance());

  write_triples_jsonl(raw, (dir / "triples_raw.jsonl").string());
  write_triples_jsonl(predicate_kept, (dir / "triples.jsonl").string());

  StageCounts counts;
  counts.values["sentences"] = sentences;
  counts.values["parsed"] = parsed_ok;
  counts.values["parse_failures"] = parse_failures;
  counts.values["raw_groups"] = static_cast<long>(raw.size());
  counts.values["lexicon_filtered"] = static_cast<long>(lexicon_kept.size());
  counts.values["predicate_filtered"] =
      static_cast<long>(predicate_kept.size());
  write_manifest(cfg, "extract", counts,
                 {"triples_raw.jsonl", "triples.jsonl"});
  return counts;
}

StageCounts run_build_dataset(const PipelineConfig& cfg) {
  const auto triples = read_triples_jsonl(triples_path(cfg));
  FormalPropertyLabelMap fp_map;
  const fs::path existing =
      fs::path(cfg.get("out_dir")) / "fp_label_map.json";
  if (fs::exists(existing)) {
    fp_map = FormalPropertyLabelMap::load(existing.string());
  }

  std::vector<AnnotatedExample> annotated;
  long span_conflicts = 0;
  for (const auto& t : triples) {
    try {
      annotated.push_back(annotate(t, fp_map));
    } catch (const Error& err) {
      if (err.code() != Err::SpanConflict) throw;
      ++span_conflicts;
      log_warn(std::string(err.what()) + " (rejected)");
    }
  }

  StageCounts counts;
  counts.values["triples"] = static_cast<long>(triples.size());
  counts.values["span_conflicts"] = span_conflicts;
  counts.values["annotated"] = static_cast<long>(annotated.size());
  return finalize_dataset(cfg, "dataset", std::move(annotated), fp_map,
                          std::move(counts));
}

StageCounts run_synth(const PipelineConfig& cfg) {
  SynthConfig sc;
  sc.num_examples = static_cast<int>(cfg.get_int("synth_examples"));
  sc.num_identifiers = static_cast<int>(cfg.get_int("synth_identifiers"));
  sc.min_sentence_words = static_cast<int>(cfg.get_int("synth_min_words"));
  sc.max_sentence_words = static_cast<int>(cfg.get_int("synth_max_words"));
  sc.seed = static_cast<std::uint64_t>(cfg.get_int("seed"));
  sc.predicate_weights.clear();
  for (const auto& item : split_csv_list(cfg.get("synth_predicates"))) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      sc.predicate_weights.emplace_back(item, 1.0);
    } else {
      sc.predicate_weights.emplace_back(item.substr(0, colon),
                                        std::stod(item.substr(colon + 1)));
    }
  }

  FormalPropertyLabelMap fp_map;
  auto examples = generate_synthetic_corpus(sc, fp_map);

  StageCounts counts;
  counts.values["annotated"] = static_cast<long>(examples.size());
  counts.values["span_conflicts"] = 0;
  return finalize_dataset(cfg, "dataset", std::move(examples), fp_map,
                          std::move(counts));
}

StageCounts run_train(const PipelineConfig& cfg) {
  const fs::path dir = ensure_out_dir(cfg);
  PreparedDataset data = load_prepared_dataset(cfg);
  const EncoderConfig encoder = encoder_config_from(cfg);
  const ModelVariant variant = variant_from_string(cfg.get("variant"));
  const TrainConfig tc = train_config_from(cfg);

  WordPieceTokenizer tokenizer(data.vocab);
  long dropped = 0;
  const auto train_ready =
      align_all(data.train, tokenizer, encoder.max_seq_len, &dropped);
  const auto valid_ready =
      align_all(data.valid, tokenizer, encoder.max_seq_len, &dropped);

  JointModel model = build_or_load_model(
      cfg, encoder, variant, static_cast<int>(data.vocab.size()));
  Trainer trainer(model, tc);
  const auto history = trainer.train(train_ready, valid_ready);

  write_metrics_csv(history, (dir / "metrics.csv").string());
  save_checkpoint((dir / "model.smck").string(), model, data.vocab,
                  data.fp_map);

  StageCounts counts;
  counts.values["train_examples"] = static_cast<long>(train_ready.size());
  counts.values["valid_examples"] = static_cast<long>(valid_ready.size());
  counts.values["alignment_dropped"] = dropped;
  counts.values["epochs"] = tc.epochs;
  if (!history.empty()) {
    counts.values["final_train_idf_milli"] =
        static_cast<long>(history.back().train_idf * 1000.0);
    counts.values["final_valid_idf_milli"] =
        static_cast<long>(history.back().valid_idf * 1000.0);
  }
  write_manifest(cfg, "train", counts, {"metrics.csv", "model.smck"},
                 to_hex(data.fp_map.hash()));
  return counts;
}

namespace {

struct LoadedModel {
  JointModel model;
  WordPieceVocab vocab;
  FormalPropertyLabelMap fp_map;
};

LoadedModel load_model(const PipelineConfig& cfg) {
  std::string path = cfg.get("model_path");
  if (path.empty()) {
    path = (fs::path(cfg.get("out_dir")) / "model.smck").string();
  }
  if (!fs::exists(path)) {
    throw Error(Err::State, "no model checkpoint at " + path +
                                "; run the train stage first");
  }
  Checkpoint ckpt = load_checkpoint(path);
  return LoadedModel{model_from_checkpoint(ckpt),
                     WordPieceVocab::from_tokens(ckpt.vocab_tokens),
                     FormalPropertyLabelMap::from_entries(ckpt.fp_entries)};
}

}  // namespace

StageCounts run_eval(const PipelineConfig& cfg) {
  const fs::path dir = ensure_out_dir(cfg);
  LoadedModel loaded = load_model(cfg);

  const fs::path data_dir = dataset_dir(cfg);
  const std::string split = cfg.get("eval_split");
  const fs::path dataset_path =
      data_dir / (split == "train"     ? "train.jsonl"
                  : split == "dataset" ? "dataset.jsonl"
                                       : "valid.jsonl");
  const auto examples = read_examples_jsonl(dataset_path.string());

  WordPieceTokenizer tokenizer(loaded.vocab);
  long dropped = 0;
  const auto ready = align_all(examples, tokenizer,
                               loaded.model.config().max_seq_len, &dropped);
  if (ready.empty()) throw Error(Err::EmptyBatch, "nothing to evaluate");

  TrainConfig tc = train_config_from(cfg);
  Trainer trainer(loaded.model, tc);
  const EvalResult result = trainer.evaluate(ready);
  const ErrorDistribution dist = trainer.error_distribution(ready);

  json j = {{"split", split},
            {"examples", ready.size()},
            {"acc_idf", result.idf_accuracy},
            {"acc_fprop", result.fprop_accuracy},
            {"mean_loss", result.mean_loss}};
  std::ofstream out(dir / "eval.json");
  if (!out) throw Error(Err::Io, "cannot write eval.json");
  out << j.dump(2) << '\n';
  write_error_distribution_json(dist, (dir / "confusion.json").string());

  StageCounts counts;
  counts.values["examples"] = static_cast<long>(ready.size());
  counts.values["alignment_dropped"] = dropped;
  counts.values["acc_idf_milli"] =
      static_cast<long>(result.idf_accuracy * 1000.0);
  counts.values["acc_fprop_milli"] =
      static_cast<long>(result.fprop_accuracy * 1000.0);
  write_manifest(cfg, "eval", counts, {"eval.json", "confusion.json"},
                 to_hex(loaded.fp_map.hash()));
  return counts;
}

StageCounts run_export(const PipelineConfig& cfg) {
  const fs::path dir = ensure_out_dir(cfg);
  const std::string mode = cfg.get("export_mode");
  const std::string format = cfg.get("export_format");
  if (format != "csv" && format != "jsonl") {
    throw Error(Err::Config, "export_format must be csv or jsonl");
  }

  std::vector<FormalDependencyRecord> records;
  StageCounts counts;
  if (mode == "gold") {
    for (const auto& t : read_triples_jsonl(triples_path(cfg))) {
      records.push_back(record_from_triple(t));
    }
  } else if (mode == "prediction") {
    LoadedModel loaded = load_model(cfg);
    const fs::path data_dir = dataset_dir(cfg);
    const auto examples =
        read_examples_jsonl((data_dir / "dataset.jsonl").string());
    WordPieceTokenizer tokenizer(loaded.vocab);
    long skipped = 0;
    for (const auto& example : examples) {
      ModelReadyExample ready;
      try {
        ready = align_to_subwords(example, tokenizer,
                                  loaded.model.config().max_seq_len);
      } catch (const Error& err) {
        if (err.code() != Err::TooLong) throw;
        ++skipped;
        continue;
      }
      auto graph = loaded.model.forward(ready.subword_ids);
      const auto& fp_logits = graph.tape.value(graph.fp_logits);
      const auto probs = nn::softmax_rows_value(fp_logits);

      // Gold relation position in subword space.
      int position = -1;
      for (std::size_t i = 0; i < ready.fp_labels.size(); ++i) {
        if (ready.fp_labels[i] != kIgnoreLabel && ready.fp_labels[i] != 0) {
          position = static_cast<int>(i);
          break;
        }
      }
      if (position < 0) {
        ++skipped;
        continue;
      }
      const auto predicted = nn::argmax_rows(fp_logits);
      const int label = predicted[position];
      if (label == 0) {  // predicted no formal property here
        ++skipped;
        continue;
      }
      // Identifier surfaces come from the gold spans.
      std::string id0, id1;
      for (std::size_t w = 0; w < example.words.size(); ++w) {
        if (example.identifier_labels[w] == IdentifierLabelMap::kIdentifier0) {
          id0 = id0.empty() ? example.words[w] : id0 + " " + example.words[w];
        } else if (example.identifier_labels[w] ==
                   IdentifierLabelMap::kIdentifier1) {
          id1 = id1.empty() ? example.words[w] : id1 + " " + example.words[w];
        }
      }
      FormalDependencyRecord r;
      r.identifier0 = id0;
      r.identifier1 = id1;
      r.predicate = loaded.fp_map.word_for(label);
      r.category = PredicateCatalog::instance().category(r.predicate);
      r.sentence_id = example.sentence_id;
      r.from_prediction = true;
      r.confidence = probs(position, label);
      records.push_back(std::move(r));
    }
    counts.values["skipped"] = skipped;
  } else {
    throw Error(Err::Config, "export_mode must be gold or prediction");
  }

  const std::string table_name =
      format == "csv" ? "dependency_table.csv" : "dependency_table.jsonl";
  if (format == "csv") {
    export_dependency_csv(records, (dir / table_name).string());
  } else {
    export_dependency_jsonl(records, (dir / table_name).string());
  }

  // Predicate frequency report when a dataset is available.
  std::vector<std::string> artifacts = {table_name};
  const fs::path dataset_path = dataset_dir(cfg) / "dataset.jsonl";
  const fs::path fp_map_path = dataset_dir(cfg) / "fp_label_map.json";
  if (fs::exists(dataset_path) && fs::exists(fp_map_path)) {
    const auto dataset = read_examples_jsonl(dataset_path.string());
    if (!dataset.empty()) {
      const auto fp_map = FormalPropertyLabelMap::load(fp_map_path.string());
      write_catalog_summary_csv(summarize_catalog(dataset, fp_map),
                                (dir / "catalog_summary.csv").string());
      artifacts.push_back("catalog_summary.csv");
    }
  }

  counts.values["records"] = static_cast<long>(records.size());
  write_manifest(cfg, "export", counts, artifacts);
  return counts;
}

std::string run_report(const PipelineConfig& cfg) {
  const fs::path dir = ensure_out_dir(cfg);
  const json ingest = read_manifest(dir, "ingest");
  const json extract = read_manifest(dir, "extract");
  const json dataset = read_manifest(dir, "dataset");

  json funnel;
  funnel["tables"] = ingest["counts"].value("tables", 0L);
  funnel["terms"] = ingest["counts"].value("terms", 0L);
  funnel["sentences"] = extract["counts"].value("sentences", 0L);
  funnel["raw_groups"] = extract["counts"].value("raw_groups", 0L);
  funnel["lexicon_filtered"] = extract["counts"].value("lexicon_filtered", 0L);
  funnel["predicate_filtered"] =
      extract["counts"].value("predicate_filtered", 0L);
  funnel["length_filtered"] = dataset["counts"].value("length_filtered", 0L);
  funnel["final_examples"] = dataset["counts"].value("final_examples", 0L);

  json report = {{"funnel", std::move(funnel)},
                 {"config_hash", cfg.config_hash()},
                 {"seed", cfg.get_int("seed")}};
  const std::string text = report.dump(2);
  std::ofstream out(dir / "report.json");
  if (!out) throw Error(Err::Io, "cannot write report.json");
  out << text << '\n';
  return text;
}

}  // namespace specmine
