#include "export.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "common.hpp"

namespace specmine {

using nlohmann::json;

namespace {

SecurityCategory category_from_name(const std::string& name) {
  for (auto c : {SecurityCategory::Confidentiality, SecurityCategory::Integrity,
                 SecurityCategory::Authentication, SecurityCategory::Accounting,
                 SecurityCategory::Belong, SecurityCategory::Generation}) {
    if (name == category_name(c)) return c;
  }
  throw Error(Err::Parse, "unknown security category: " + name);
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string format_confidence(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

void check_record(const FormalDependencyRecord& r) {
  const auto& catalog = PredicateCatalog::instance();
  if (!catalog.contains(r.predicate)) {
    throw Error(Err::Parse, "record predicate not in catalog: " + r.predicate);
  }
  if (catalog.category(r.predicate) != r.category) {
    throw Error(Err::Parse,
                "record category does not match catalog for " + r.predicate);
  }
  if (r.from_prediction) {
    if (!r.confidence || !(*r.confidence > 0.0 && *r.confidence <= 1.0)) {
      throw Error(Err::Parse,
                  "prediction record needs confidence in (0, 1]");
    }
  } else if (r.confidence) {
    throw Error(Err::Parse, "gold record must not carry confidence");
  }
}

constexpr const char* kCsvHeader =
    "identifier0,identifier1,predicate,category,sentence_id,mode,confidence";

}  // namespace

FormalDependencyRecord record_from_triple(const SRTTriple& triple) {
  FormalDependencyRecord r;
  r.identifier0 = triple.source;
  r.identifier1 = triple.target;
  r.predicate = triple.lemma;
  r.category = PredicateCatalog::instance().category(triple.lemma);
  r.sentence_id = triple.sentence_id;
  r.from_prediction = false;
  return r;
}

void export_dependency_csv(const std::vector<FormalDependencyRecord>& records,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Err::Io, "cannot write " + path);
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    check_record(r);
    out << csv_quote(r.identifier0) << ',' << csv_quote(r.identifier1) << ','
        << csv_quote(r.predicate) << ',' << category_name(r.category) << ','
        << csv_quote(r.sentence_id) << ','
        << (r.from_prediction ? "model-prediction" : "gold-annotation") << ','
        << (r.confidence ? format_confidence(*r.confidence) : "") << '\n';
  }
  if (!out) throw Error(Err::Io, "failed writing " + path);
}

void export_dependency_jsonl(
    const std::vector<FormalDependencyRecord>& records,
    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Err::Io, "cannot write " + path);
  for (const auto& r : records) {
    check_record(r);
    json j = {{"identifier0", r.identifier0},
              {"identifier1", r.identifier1},
              {"predicate", r.predicate},
              {"category", category_name(r.category)},
              {"sentence_id", r.sentence_id},
              {"mode", r.from_prediction ? "model-prediction" : "gold-annotation"}};
    if (r.confidence) j["confidence"] = *r.confidence;
    out << j.dump() << '\n';
  }
}

std::vector<FormalDependencyRecord> import_dependency_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::Io, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      (line != kCsvHeader && line != std::string(kCsvHeader) + "\r")) {
    throw Error(Err::Parse, "unexpected dependency-table header in " + path);
  }
  std::vector<FormalDependencyRecord> records;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = csv_split(line);
    if (fields.size() != 7) {
      throw Error(Err::Parse, "bad dependency-table row in " + path);
    }
    FormalDependencyRecord r;
    r.identifier0 = fields[0];
    r.identifier1 = fields[1];
    r.predicate = fields[2];
    r.category = category_from_name(fields[3]);
    r.sentence_id = fields[4];
    r.from_prediction = fields[5] == "model-prediction";
    if (!fields[6].empty()) r.confidence = std::stod(fields[6]);
    check_record(r);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<FormalDependencyRecord> import_dependency_jsonl(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::Io, "cannot open " + path);
  std::vector<FormalDependencyRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(Err::Parse, "bad record JSON in " + path);
    FormalDependencyRecord r;
    r.identifier0 = j.at("identifier0").get<std::string>();
    r.identifier1 = j.at("identifier1").get<std::string>();
    r.predicate = j.at("predicate").get<std::string>();
    r.category = category_from_name(j.at("category").get<std::string>());
    r.sentence_id = j.value("sentence_id", "");
    r.from_prediction = j.value("mode", "gold-annotation") == "model-prediction";
    if (j.contains("confidence")) r.confidence = j["confidence"].get<double>();
    check_record(r);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<PredicateFrequency> summarize_catalog(
    const std::vector<AnnotatedExample>& dataset,
    const FormalPropertyLabelMap& fp_map) {
  if (dataset.empty()) {
    throw Error(Err::EmptyBatch, "summarize_catalog: empty dataset");
  }
  std::map<int, long> counts;
  for (const auto& example : dataset) {
    counts[example.gold_relation_id] += 1;
  }
  std::vector<PredicateFrequency> out;
  for (const auto& [id, count] : counts) {
    out.push_back({fp_map.word_for(id), id, count});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.label_id < b.label_id;
  });
  return out;
}

void write_catalog_summary_csv(const std::vector<PredicateFrequency>& stats,
                               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Err::Io, "cannot write " + path);
  out << "predicate,label_id,count\n";
  for (const auto& s : stats) {
    out << csv_quote(s.predicate) << ',' << s.label_id << ',' << s.count
        << '\n';
  }
}

}  // namespace specmine
