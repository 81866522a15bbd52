#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "text.hpp"

namespace specmine {

using nlohmann::json;

const char* IdentifierLabelMap::name(int label) {
  switch (label) {
    case kOutside: return "O";
    case kIdentifier0: return "identifier0";
    case kIdentifier1: return "identifier1";
  }
  return "?";
}

FormalPropertyLabelMap::FormalPropertyLabelMap() {
  by_word_["O"] = 0;
  by_id_.push_back("O");
}

int FormalPropertyLabelMap::assign(const std::string& lemma) {
  auto it = by_word_.find(lemma);
  if (it != by_word_.end()) return it->second;
  if (!PredicateCatalog::instance().contains(lemma)) {
    throw Error(Err::Config, "cannot label non-catalog predicate: " + lemma);
  }
  const int id = static_cast<int>(by_id_.size());
  by_word_[lemma] = id;
  by_id_.push_back(lemma);
  return id;
}

int FormalPropertyLabelMap::id_for(const std::string& lemma) const {
  auto it = by_word_.find(lemma);
  if (it == by_word_.end()) {
    throw Error(Err::Config, "no label id for predicate: " + lemma);
  }
  return it->second;
}

const std::string& FormalPropertyLabelMap::word_for(int id) const {
  if (id < 0 || id >= static_cast<int>(by_id_.size())) {
    throw Error(Err::Config, "no predicate for label id " + std::to_string(id));
  }
  return by_id_[id];
}

bool FormalPropertyLabelMap::contains(const std::string& lemma) const {
  return by_word_.count(lemma) != 0;
}

void FormalPropertyLabelMap::complete_from_catalog() {
  for (const auto& word : PredicateCatalog::instance().words()) assign(word);
}

void FormalPropertyLabelMap::save(const std::string& path) const {
  json j = json::object();
  for (const auto& [word, id] : by_word_) j[word] = id;
  std::ofstream out(path);
  if (!out) throw Error(Err::Io, "cannot write label map: " + path);
  out << j.dump(2) << '\n';
}

FormalPropertyLabelMap FormalPropertyLabelMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::Io, "cannot open label map: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(Err::Parse, "malformed label map: " + path);
  }
  std::map<std::string, int> entries;
  for (const auto& [word, id] : j.items()) entries[word] = id.get<int>();
  return from_entries(entries);
}

FormalPropertyLabelMap FormalPropertyLabelMap::from_entries(
    const std::map<std::string, int>& entries) {
  FormalPropertyLabelMap map;
  std::vector<std::pair<int, std::string>> by_id;
  for (const auto& [word, id] : entries) by_id.emplace_back(id, word);
  std::sort(by_id.begin(), by_id.end());
  for (const auto& [id, word] : by_id) {
    if (word == "O") {
      if (id != 0) throw Error(Err::Parse, "label map: O must have id 0");
      continue;
    }
    if (id != static_cast<int>(map.by_id_.size())) {
      throw Error(Err::Parse, "label map ids are not contiguous");
    }
    map.by_word_[word] = id;
    map.by_id_.push_back(word);
  }
  return map;
}

std::uint64_t FormalPropertyLabelMap::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& [word, id] : by_word_) {
    h = fnv1a(word, h);
    h = fnv1a(std::to_string(id), h);
  }
  return h;
}

namespace {

// Exactly one contiguous run of `label`, none elsewhere.
bool single_contiguous_span(const std::vector<int>& labels, int label) {
  int runs = 0;
  bool inside = false;
  for (int v : labels) {
    if (v == label) {
      if (!inside) {
        ++runs;
        inside = true;
      }
    } else {
      inside = false;
    }
  }
  return runs == 1;
}

}  // namespace

void check_example_invariants(const AnnotatedExample& example) {
  const auto n = example.words.size();
  if (n == 0) throw Error(Err::Parse, "empty example");
  if (example.identifier_labels.size() != n || example.fp_labels.size() != n) {
    throw Error(Err::Parse,
                example.sentence_id + ": label sequences not aligned to words");
  }
  if (!single_contiguous_span(example.identifier_labels,
                              IdentifierLabelMap::kIdentifier0) ||
      !single_contiguous_span(example.identifier_labels,
                              IdentifierLabelMap::kIdentifier1)) {
    throw Error(Err::Parse, example.sentence_id +
                                ": expected exactly one identifier0 span and "
                                "one identifier1 span");
  }
  bool has_fp = false;
  for (int v : example.fp_labels) {
    if (v < 0 || v >= FormalPropertyLabelMap::kNumLabels) {
      throw Error(Err::Parse, example.sentence_id + ": fp label out of range");
    }
    if (v != 0) has_fp = true;
  }
  if (!has_fp) {
    throw Error(Err::Parse,
                example.sentence_id + ": no formal-property label");
  }
  for (int v : example.identifier_labels) {
    if (v < 0 || v >= IdentifierLabelMap::kNumLabels) {
      throw Error(Err::Parse,
                  example.sentence_id + ": identifier label out of range");
    }
  }
}

AnnotatedExample annotate(const SRTTriple& triple,
                          FormalPropertyLabelMap& fp_map) {
  std::vector<std::string> sentence_words = split_words(triple.sentence_text);
  const int n = static_cast<int>(sentence_words.size());
  auto in_bounds = [n](const TokenSpan& s) {
    return s.begin >= 0 && s.begin < s.end && s.end <= n;
  };
  if (!in_bounds(triple.source_span) || !in_bounds(triple.target_span) ||
      !in_bounds(triple.relation_span)) {
    throw Error(Err::Parse, triple.sentence_id + ": span out of bounds");
  }
  if (triple.source_span.overlaps(triple.target_span)) {
    throw Error(Err::SpanConflict,
                triple.sentence_id + ": source and target spans overlap");
  }
  if (triple.relation_span.overlaps(triple.source_span) ||
      triple.relation_span.overlaps(triple.target_span)) {
    throw Error(Err::SpanConflict,
                triple.sentence_id + ": relation span crosses an identifier");
  }

  AnnotatedExample example;
  example.sentence_id = triple.sentence_id;
  example.words = sentence_words;
  example.words.push_back(kTripleSeparator);
  for (const auto& surface :
       {triple.source, triple.relation, triple.target}) {
    for (auto& w : split_words(surface)) example.words.push_back(std::move(w));
  }

  example.identifier_labels.assign(example.words.size(),
                                   IdentifierLabelMap::kOutside);
  example.fp_labels.assign(example.words.size(), 0);
  for (int i = triple.source_span.begin; i < triple.source_span.end; ++i) {
    example.identifier_labels[i] = IdentifierLabelMap::kIdentifier0;
  }
  for (int i = triple.target_span.begin; i < triple.target_span.end; ++i) {
    example.identifier_labels[i] = IdentifierLabelMap::kIdentifier1;
  }
  example.gold_relation_id = fp_map.assign(triple.lemma);
  for (int i = triple.relation_span.begin; i < triple.relation_span.end; ++i) {
    example.fp_labels[i] = example.gold_relation_id;
  }
  check_example_invariants(example);
  return example;
}

std::vector<AnnotatedExample> length_filter(
    const std::vector<AnnotatedExample>& examples, std::size_t max_words) {
  std::vector<AnnotatedExample> out;
  for (const auto& e : examples) {
    if (e.words.size() <= max_words) out.push_back(e);
  }
  return out;
}

std::pair<std::vector<AnnotatedExample>, std::vector<AnnotatedExample>>
split_dataset(const std::vector<AnnotatedExample>& examples,
              double valid_fraction, std::uint64_t seed) {
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) {
    throw Error(Err::Config, "valid_fraction must be in (0, 1)");
  }
  const std::size_t n = examples.size();
  if (n < 2) {
    throw Error(Err::EmptySplit,
                "need at least 2 examples to split, got " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = draw_below(rng, i + 1);
    std::swap(order[i], order[j]);
  }
  std::size_t n_valid = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * valid_fraction));
  n_valid = std::clamp<std::size_t>(n_valid, 1, n - 1);

  std::pair<std::vector<AnnotatedExample>, std::vector<AnnotatedExample>> out;
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_valid ? out.second : out.first).push_back(examples[order[i]]);
  }
  return out;
}

namespace {

// Surface form the generator uses for a predicate: base or third person.
std::string third_person(const std::string& lemma) {
  if (lemma == "=") return lemma;
  auto ends_with = [&](const char* suffix) {
    std::string_view s(suffix);
    return lemma.size() >= s.size() &&
           lemma.compare(lemma.size() - s.size(), s.size(), s) == 0;
  };
  if (ends_with("y") && lemma.size() >= 2 &&
      std::string("aeiou").find(lemma[lemma.size() - 2]) == std::string::npos) {
    return lemma.substr(0, lemma.size() - 1) + "ies";
  }
  if (ends_with("s") || ends_with("sh") || ends_with("ch") || ends_with("x") ||
      ends_with("z")) {
    return lemma + "es";
  }
  return lemma + "s";
}

const std::vector<std::string>& identifier_stems() {
  static const std::vector<std::string> stems = {
      "Radio",  "Setup",  "Config", "Report",  "Cell",    "Group",
      "Bearer", "Timer",  "Link",   "Master",  "Sync",    "Field",
      "Info",   "Request", "Mode",  "State",   "Control", "Uplink",
      "Carrier", "Signal", "Measure", "Handover", "Paging", "Beam",
  };
  return stems;
}

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {
      "the",       "a",         "each",      "message",   "value",
      "procedure", "network",   "node",      "layer",     "resource",
      "session",   "frame",     "channel",   "interface", "parameter",
      "entity",    "function",  "unit",      "period",    "upon",
      "during",    "after",     "before",    "within",    "according",
      "configured", "received", "transmitted", "pending",  "active",
      "selected",  "reported",  "current",   "initial",   "associated",
      "applicable", "specified", "corresponding", "relevant", "optional",
  };
  return words;
}

std::vector<std::string> build_identifier_vocab(int count,
                                                std::mt19937_64& rng) {
  const auto& stems = identifier_stems();
  std::vector<std::string> vocab;
  std::set<std::string> seen;
  while (static_cast<int>(vocab.size()) < count) {
    std::string name = stems[draw_below(rng, stems.size())];
    const int extra = 1 + static_cast<int>(draw_below(rng, 2));
    for (int i = 0; i < extra; ++i) {
      name += stems[draw_below(rng, stems.size())];
    }
    if (seen.insert(name).second) vocab.push_back(std::move(name));
  }
  return vocab;
}

// Largest-remainder apportionment of n slots among weighted predicates.
std::vector<std::string> apportion_predicates(
    const std::vector<std::pair<std::string, double>>& weights, int n) {
  double total = 0;
  for (const auto& [word, w] : weights) {
    if (w < 0) throw Error(Err::Config, "negative predicate weight: " + word);
    total += w;
  }
  if (total <= 0) throw Error(Err::Config, "predicate weights sum to zero");

  std::vector<int> counts(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double share = n * weights[i].second / total;
    counts[i] = static_cast<int>(std::floor(share));
    assigned += counts[i];
    remainders.emplace_back(share - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; k < n - assigned; ++k) {
    counts[remainders[k % remainders.size()].second] += 1;
  }

  std::vector<std::string> slots;
  slots.reserve(n);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (int k = 0; k < counts[i]; ++k) slots.push_back(weights[i].first);
  }
  return slots;
}

}  // namespace

std::vector<AnnotatedExample> generate_synthetic_corpus(
    const SynthConfig& cfg, FormalPropertyLabelMap& fp_map) {
  if (cfg.num_examples <= 0) {
    throw Error(Err::Config, "num_examples must be positive");
  }
  if (cfg.min_sentence_words < 6 ||
      cfg.max_sentence_words < cfg.min_sentence_words) {
    throw Error(Err::Config, "invalid sentence length range");
  }
  const auto& catalog = PredicateCatalog::instance();
  for (const auto& [word, weight] : cfg.predicate_weights) {
    if (!catalog.contains(word)) {
      throw Error(Err::Config, "unknown predicate in weights: " + word);
    }
  }

  std::mt19937_64 rng(cfg.seed);
  const auto identifiers = build_identifier_vocab(cfg.num_identifiers, rng);
  auto slots = apportion_predicates(cfg.predicate_weights, cfg.num_examples);
  for (std::size_t i = slots.size() - 1; i > 0; --i) {
    std::swap(slots[i], slots[draw_below(rng, i + 1)]);
  }

  const auto& fillers = filler_words();
  std::vector<AnnotatedExample> out;
  out.reserve(cfg.num_examples);
  for (int idx = 0; idx < cfg.num_examples; ++idx) {
    const std::string& lemma = slots[idx];
    const std::string surface =
        draw_below(rng, 2) == 0 ? lemma : third_person(lemma);

    const std::string& id0 = identifiers[draw_below(rng, identifiers.size())];
    std::string id1 = identifiers[draw_below(rng, identifiers.size())];
    while (id1 == id0) id1 = identifiers[draw_below(rng, identifiers.size())];

    const int length = cfg.min_sentence_words +
                       static_cast<int>(draw_below(
                           rng, cfg.max_sentence_words -
                                    cfg.min_sentence_words + 1));
    const int core = 5;  // "the <id0> <pred> the <id1>"
    const int pad = length - core;
    const int before = static_cast<int>(draw_below(rng, pad + 1));
    const int after = pad - before;

    std::vector<std::string> words;
    words.reserve(length);
    for (int i = 0; i < before; ++i) {
      words.push_back(fillers[draw_below(rng, fillers.size())]);
    }
    const int src_pos = before + 1;
    const int rel_pos = before + 2;
    const int tgt_pos = before + 4;
    words.push_back("the");
    words.push_back(id0);
    words.push_back(surface);
    words.push_back("the");
    words.push_back(id1);
    for (int i = 0; i < after; ++i) {
      words.push_back(fillers[draw_below(rng, fillers.size())]);
    }

    SRTTriple triple;
    triple.source = id0;
    triple.source_span = {src_pos, src_pos + 1};
    triple.relation = surface;
    triple.lemma = lemma;
    triple.relation_span = {rel_pos, rel_pos + 1};
    triple.target = id1;
    triple.target_span = {tgt_pos, tgt_pos + 1};
    triple.sentence_id = "synth" + std::to_string(idx);
    triple.sentence_text = join_words(words);
    out.push_back(annotate(triple, fp_map));
  }
  return out;
}

std::string example_to_json(const AnnotatedExample& e) {
  json j = {{"sentence_id", e.sentence_id},
            {"words", e.words},
            {"identifier_labels", e.identifier_labels},
            {"fp_labels", e.fp_labels},
            {"gold_relation_id", e.gold_relation_id}};
  return j.dump();
}

AnnotatedExample example_from_json(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(Err::Parse, "malformed example JSON");
  }
  AnnotatedExample e;
  e.sentence_id = j.value("sentence_id", "");
  for (const auto& w : j.at("words")) e.words.push_back(w.get<std::string>());
  for (const auto& v : j.at("identifier_labels"))
    e.identifier_labels.push_back(v.get<int>());
  for (const auto& v : j.at("fp_labels")) e.fp_labels.push_back(v.get<int>());
  e.gold_relation_id = j.value("gold_relation_id", 0);
  return e;
}

void write_examples_jsonl(const std::vector<AnnotatedExample>& examples,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Err::Io, "cannot write " + path);
  for (const auto& e : examples) out << example_to_json(e) << '\n';
}

std::vector<AnnotatedExample> read_examples_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::Io, "cannot open dataset: " + path);
  std::vector<AnnotatedExample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(example_from_json(line));
  }
  return out;
}

}  // namespace specmine
