// Command-line front end for the specmine pipeline. Talks to the core
// strictly through the public C API.
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specmine.h"

namespace {

const char* code_name(sm_code code) {
  switch (code) {
    case SM_OK: return "SM_OK";
    case SM_ERR_CONFIG: return "SM_ERR_CONFIG";
    case SM_ERR_IO: return "SM_ERR_IO";
    case SM_ERR_PARSE: return "SM_ERR_PARSE";
    case SM_ERR_BACKEND: return "SM_ERR_BACKEND";
    case SM_ERR_STATE: return "SM_ERR_STATE";
    case SM_ERR_TRAIN: return "SM_ERR_TRAIN";
    case SM_ERR_INTERNAL: return "SM_ERR_INTERNAL";
  }
  return "SM_ERR_INTERNAL";
}

std::string json_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

int fail(const sm_pipeline* handle, sm_code code) {
  std::fprintf(stderr, "{\"error\": {\"code\": \"%s\", \"message\": \"%s\"}}\n",
               code_name(code),
               json_escape(sm_pipeline_last_error(handle)).c_str());
  return static_cast<int>(code);
}

struct PipelineHandle {
  sm_pipeline* ptr = sm_pipeline_new();
  ~PipelineHandle() { sm_pipeline_free(ptr); }
};

// Deferred key=value assignments collected during flag parsing, applied in
// order before the stage runs.
using Assignments = std::vector<std::pair<std::string, std::string>>;

void add_value_flag(CLI::App* cmd, const std::string& flag,
                    const std::string& key, const std::string& desc,
                    std::shared_ptr<Assignments> out) {
  cmd->add_option_function<std::string>(
      flag,
      [out, key](const std::string& value) { out->emplace_back(key, value); },
      desc);
}

void add_bool_flag(CLI::App* cmd, const std::string& flag,
                   const std::string& key, const std::string& desc,
                   std::shared_ptr<Assignments> out) {
  cmd->add_flag_callback(
      flag, [out, key] { out->emplace_back(key, "true"); }, desc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"specmine: mine terminology, relation triples, and formal "
               "dependency tables from protocol specifications"};
  app.require_subcommand(1);

  PipelineHandle handle;
  if (!handle.ptr) {
    std::fprintf(stderr, "{\"error\": {\"code\": \"SM_ERR_INTERNAL\", "
                         "\"message\": \"allocation failed\"}}\n");
    return SM_ERR_INTERNAL;
  }

  auto assignments = std::make_shared<Assignments>();
  std::string config_file;
  app.add_option("--config", config_file,
                 "key = value configuration file applied before flags");

  struct Stage {
    std::string name;
    std::function<sm_code(sm_pipeline*)> run;
    CLI::App* cmd = nullptr;
  };
  std::vector<Stage> stages = {
      {"ingest", [](sm_pipeline* p) { return sm_run_ingest(p); }},
      {"extract", [](sm_pipeline* p) { return sm_run_extract(p); }},
      {"build-dataset", [](sm_pipeline* p) { return sm_run_build_dataset(p); }},
      {"synth", [](sm_pipeline* p) { return sm_run_synth(p); }},
      {"train", [](sm_pipeline* p) { return sm_run_train(p); }},
      {"eval", [](sm_pipeline* p) { return sm_run_eval(p); }},
      {"export", [](sm_pipeline* p) { return sm_run_export(p); }},
      {"report", nullptr},
  };

  for (auto& stage : stages) {
    CLI::App* cmd = app.add_subcommand(stage.name, stage.name + " stage");
    stage.cmd = cmd;
    add_value_flag(cmd, "--out-dir", "out_dir", "artifact directory",
                   assignments);
    add_value_flag(cmd, "--seed", "seed", "run seed", assignments);
    cmd->add_option_function<std::vector<std::string>>(
        "--set",
        [assignments](const std::vector<std::string>& pairs) {
          for (const auto& pair : pairs) {
            const auto eq = pair.find('=');
            if (eq == std::string::npos) {
              throw CLI::ValidationError("--set expects key=value");
            }
            assignments->emplace_back(pair.substr(0, eq), pair.substr(eq + 1));
          }
        },
        "extra key=value overrides");
  }

  auto cmd_of = [&](const std::string& name) -> CLI::App* {
    for (auto& stage : stages) {
      if (stage.name == name) return stage.cmd;
    }
    return nullptr;
  };

  CLI::App* ingest = cmd_of("ingest");
  add_value_flag(ingest, "--tables", "tables", "tables JSONL file", assignments);
  add_value_flag(ingest, "--stopwords", "stopwords", "stopword list file",
                 assignments);
  add_value_flag(ingest, "--domain-exclude", "domain_exclude",
                 "expert exclude list file", assignments);

  CLI::App* extract = cmd_of("extract");
  add_value_flag(extract, "--sentences", "sentences",
                 "sentence file, one per line", assignments);
  add_value_flag(extract, "--backend", "backend",
                 "parser backend: fixture | http", assignments);
  add_value_flag(extract, "--endpoint", "backend_endpoint",
                 "http backend endpoint", assignments);
  add_value_flag(extract, "--fixtures", "backend_fixtures",
                 "fixture parses JSONL", assignments);
  add_value_flag(extract, "--lexicon", "lexicon", "lexicon file override",
                 assignments);
  add_bool_flag(extract, "--fallback-patterns", "fallback_patterns",
                "enable copula/oblique fallbacks", assignments);

  CLI::App* build = cmd_of("build-dataset");
  add_value_flag(build, "--triples", "triples", "triples JSONL override",
                 assignments);
  add_value_flag(build, "--max-words", "max_words", "word-count cutoff",
                 assignments);
  add_value_flag(build, "--max-seq", "max_seq_len", "subword cutoff",
                 assignments);
  add_value_flag(build, "--valid-fraction", "valid_fraction",
                 "validation share", assignments);
  add_value_flag(build, "--vocab-min-freq", "vocab_min_freq",
                 "wordpiece whole-word threshold", assignments);

  CLI::App* synth = cmd_of("synth");
  add_value_flag(synth, "--examples", "synth_examples", "corpus size",
                 assignments);
  add_value_flag(synth, "--identifiers", "synth_identifiers",
                 "identifier vocabulary size", assignments);
  add_value_flag(synth, "--min-words", "synth_min_words",
                 "min sentence length", assignments);
  add_value_flag(synth, "--max-words", "synth_max_words",
                 "max sentence length", assignments);
  add_value_flag(synth, "--predicates", "synth_predicates",
                 "weights, e.g. include:620,contain:327", assignments);
  add_value_flag(synth, "--valid-fraction", "valid_fraction",
                 "validation share", assignments);

  CLI::App* train = cmd_of("train");
  add_value_flag(train, "--variant", "variant",
                 "disjoint | joint1 | joint2", assignments);
  add_bool_flag(train, "--tiny", "tiny",
                "desk-scale profile (2 layers, 32 dims, random init)",
                assignments);
  add_value_flag(train, "--layers", "num_layers", "encoder layers", assignments);
  add_value_flag(train, "--hidden", "hidden_dim", "hidden width", assignments);
  add_value_flag(train, "--heads", "num_heads", "attention heads", assignments);
  add_value_flag(train, "--checkpoint", "checkpoint",
                 "random | path to .smck | pretrained name", assignments);
  add_value_flag(train, "--lr", "learning_rate", "learning rate", assignments);
  add_value_flag(train, "--epochs", "epochs", "training epochs", assignments);
  add_value_flag(train, "--weight-decay", "weight_decay", "decay strength",
                 assignments);
  add_value_flag(train, "--batch-size", "batch_size", "batch size", assignments);
  add_value_flag(train, "--fp-loss-weight", "fp_loss_weight",
                 "formal-property loss weight", assignments);
  add_value_flag(train, "--dataset-dir", "dataset_dir",
                 "directory with train/valid/vocab artifacts", assignments);
  add_bool_flag(train, "--freeze-encoder", "freeze_encoder",
                "train heads only", assignments);

  CLI::App* eval = cmd_of("eval");
  add_value_flag(eval, "--model", "model_path", "checkpoint file", assignments);
  add_value_flag(eval, "--split", "eval_split", "train | valid | dataset",
                 assignments);
  add_value_flag(eval, "--dataset-dir", "dataset_dir",
                 "directory with dataset artifacts", assignments);

  CLI::App* exp = cmd_of("export");
  add_value_flag(exp, "--format", "export_format", "csv | jsonl", assignments);
  add_value_flag(exp, "--mode", "export_mode", "gold | prediction", assignments);
  add_value_flag(exp, "--model", "model_path", "checkpoint for prediction mode",
                 assignments);
  add_value_flag(exp, "--triples", "triples", "triples JSONL override",
                 assignments);
  add_value_flag(exp, "--dataset-dir", "dataset_dir",
                 "directory with dataset artifacts", assignments);

  CLI11_PARSE(app, argc, argv);

  if (!config_file.empty()) {
    if (sm_code rc = sm_pipeline_load_config(handle.ptr, config_file.c_str());
        rc != SM_OK) {
      return fail(handle.ptr, rc);
    }
  }
  for (const auto& [key, value] : *assignments) {
    if (sm_code rc = sm_pipeline_set(handle.ptr, key.c_str(), value.c_str());
        rc != SM_OK) {
      return fail(handle.ptr, rc);
    }
  }

  for (const auto& stage : stages) {
    if (!stage.cmd->parsed()) continue;
    if (stage.name == "report") {
      char* json = nullptr;
      if (sm_code rc = sm_run_report(handle.ptr, &json); rc != SM_OK) {
        return fail(handle.ptr, rc);
      }
      std::printf("%s\n", json);
      sm_free(json);
      return 0;
    }
    if (sm_code rc = stage.run(handle.ptr); rc != SM_OK) {
      return fail(handle.ptr, rc);
    }
    return 0;
  }
  return 0;
}
