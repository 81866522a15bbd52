#ifndef SPECMINE_PIPELINE_HPP
#define SPECMINE_PIPELINE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace specmine {

// Flat key=value configuration driving every pipeline stage. Keys have
// documented defaults; `tiny = true` applies the desk-scale profile (2-layer
// 32-dim encoder, random init, higher learning rate) to any key the user
// has not set explicitly. SPECMINE_BACKEND_ENDPOINT overrides
// backend_endpoint.
class PipelineConfig {
 public:
  PipelineConfig();

  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);

  std::string get(const std::string& key) const;
  bool is_set(const std::string& key) const;

  long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  // FNV-1a over the canonical "key=value\n" serialization of every
  // resolved key.
  std::string config_hash() const;

  static const std::map<std::string, std::string>& defaults();

 private:
  std::map<std::string, std::string> values_;
};

struct StageCounts {
  std::map<std::string, long> values;
};

// Each stage reads its inputs per the config, writes its artifacts under
// out_dir, and records a <stage>_manifest.json with the config hash, seed,
// label-map hash and stage counts.
StageCounts run_ingest(const PipelineConfig& cfg);
StageCounts run_extract(const PipelineConfig& cfg);
StageCounts run_build_dataset(const PipelineConfig& cfg);
StageCounts run_synth(const PipelineConfig& cfg);
StageCounts run_train(const PipelineConfig& cfg);
StageCounts run_eval(const PipelineConfig& cfg);
StageCounts run_export(const PipelineConfig& cfg);

// Consolidated funnel counts (tables, terms, raw_groups, lexicon_filtered,
// predicate_filtered, length_filtered, ...) drawn from the stage manifests.
// Returns the JSON text it also writes to out_dir/report.json.
std::string run_report(const PipelineConfig& cfg);

}  // namespace specmine

#endif  // SPECMINE_PIPELINE_HPP
