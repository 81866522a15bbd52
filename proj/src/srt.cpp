#include "srt.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "common.hpp"
#include "text.hpp"

namespace specmine {

using nlohmann::json;

void ParsedSentence::validate() const {
  const int n = static_cast<int>(tokens.size());
  if (n == 0) {
    throw Error(Err::ParseFailure, sentence_id + ": no tokens");
  }
  if (pos_tags.size() != tokens.size()) {
    throw Error(Err::ParseFailure,
                sentence_id + ": pos_tags/token length mismatch");
  }
  int roots = 0;
  for (const auto& edge : dep_edges) {
    if (edge.dep < 0 || edge.dep >= n || edge.head < -1 || edge.head >= n) {
      throw Error(Err::ParseFailure,
                  sentence_id + ": dependency edge index out of range");
    }
    if (edge.head == -1) ++roots;
  }
  if (roots != 1) {
    throw Error(Err::ParseFailure,
                sentence_id + ": expected exactly one root edge, got " +
                    std::to_string(roots));
  }
}

ParsedSentence parsed_sentence_from_json(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(Err::ParseFailure, "malformed parsed-sentence JSON");
  }
  ParsedSentence out;
  out.sentence_id = j.value("sentence_id", "");
  out.text = j.value("text", "");
  for (const auto& t : j.value("tokens", json::array()))
    out.tokens.push_back(t.get<std::string>());
  for (const auto& t : j.value("pos_tags", json::array()))
    out.pos_tags.push_back(t.get<std::string>());
  for (const auto& e : j.value("dep_edges", json::array())) {
    if (!e.is_array() || e.size() != 3) {
      throw Error(Err::ParseFailure,
                  out.sentence_id + ": dep edge must be [head, dep, label]");
    }
    out.dep_edges.push_back(
        {e[0].get<int>(), e[1].get<int>(), e[2].get<std::string>()});
  }
  return out;
}

std::string parsed_sentence_to_json(const ParsedSentence& parsed) {
  json edges = json::array();
  for (const auto& e : parsed.dep_edges)
    edges.push_back({e.head, e.dep, e.label});
  json j = {{"sentence_id", parsed.sentence_id},
            {"text", parsed.text},
            {"tokens", parsed.tokens},
            {"pos_tags", parsed.pos_tags},
            {"dep_edges", std::move(edges)}};
  return j.dump();
}

FixtureBackend::FixtureBackend(const std::string& jsonl_path) {
  std::ifstream in(jsonl_path);
  if (!in) {
    throw Error(Err::BackendUnavailable,
                "cannot open parse fixtures: " + jsonl_path);
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records_.push_back(parsed_sentence_from_json(line));
  }
}

ParsedSentence FixtureBackend::parse(const std::string& sentence_id,
                                     const std::string& text) {
  for (const auto& rec : records_) {
    if (rec.text == text) return rec;
  }
  for (const auto& rec : records_) {
    if (rec.sentence_id == sentence_id) return rec;
  }
  throw Error(Err::BackendUnavailable,
              "no fixture parse for sentence " + sentence_id);
}

HttpBackend::HttpBackend(const std::string& endpoint) {
  std::string rest = endpoint;
  if (rest.rfind("http://", 0) == 0) rest = rest.substr(7);
  auto slash = rest.find('/');
  std::string hostport = rest.substr(0, slash);
  path_prefix_ = slash == std::string::npos ? "" : rest.substr(slash);
  if (!path_prefix_.empty() && path_prefix_.back() == '/')
    path_prefix_.pop_back();
  auto colon = hostport.find(':');
  host_ = hostport.substr(0, colon);
  port_ = colon == std::string::npos ? 80
                                     : std::stoi(hostport.substr(colon + 1));
  if (host_.empty()) {
    throw Error(Err::Config, "invalid backend endpoint: " + endpoint);
  }
}

ParsedSentence HttpBackend::parse(const std::string& sentence_id,
                                  const std::string& text) {
  httplib::Client client(host_, port_);
  client.set_connection_timeout(5);
  client.set_read_timeout(30);
  json body = {{"sentence_id", sentence_id}, {"text", text}};
  auto res = client.Post(path_prefix_ + "/parse", body.dump(),
                         "application/json");
  if (!res) {
    throw Error(Err::BackendUnavailable,
                "parser backend unreachable at " + host_ + ":" +
                    std::to_string(port_));
  }
  if (res->status != 200) {
    throw Error(Err::BackendUnavailable,
                "parser backend returned HTTP " +
                    std::to_string(res->status) + " for " + sentence_id);
  }
  return parsed_sentence_from_json(res->body);
}

std::unique_ptr<ParserBackend> make_backend(const std::string& kind,
                                            const std::string& endpoint,
                                            const std::string& fixture_path) {
  if (kind == "fixture") return std::make_unique<FixtureBackend>(fixture_path);
  if (kind == "http") return std::make_unique<HttpBackend>(endpoint);
  throw Error(Err::Config, "unknown parser backend: " + kind);
}

ParsedSentence parse_dependencies(const std::string& sentence_id,
                                  const std::string& text,
                                  ParserBackend& backend) {
  if (text.empty() || split_words(text).empty()) {
    throw Error(Err::Parse, sentence_id + ": empty sentence rejected");
  }
  ParsedSentence parsed = backend.parse(sentence_id, text);
  if (parsed.sentence_id.empty()) parsed.sentence_id = sentence_id;
  if (parsed.text.empty()) parsed.text = text;
  parsed.validate();
  return parsed;
}

namespace {

bool is_subject_label(const std::string& label) { return label == "nsubj"; }

bool is_object_label(const std::string& label) {
  return label == "obj" || label == "dobj";
}

bool is_oblique_label(const std::string& label) {
  return label == "obl" || label == "nmod";
}

SRTTriple make_triple(const ParsedSentence& parsed, int subj, int verb,
                      int obj) {
  SRTTriple t;
  t.source = parsed.tokens[subj];
  t.source_span = {subj, subj + 1};
  t.relation = parsed.tokens[verb];
  t.lemma = lemmatize(parsed.tokens[verb]);
  t.relation_span = {verb, verb + 1};
  t.target = parsed.tokens[obj];
  t.target_span = {obj, obj + 1};
  t.sentence_id = parsed.sentence_id;
  // Token join, not the raw text: downstream annotation splits on
  // whitespace, so spans must line up with the parse tokens.
  t.sentence_text = join_words(parsed.tokens);
  return t;
}

}  // namespace

std::vector<SRTTriple> extract_srt(const ParsedSentence& parsed,
                                   const ExtractOptions& opts) {
  parsed.validate();
  const int n = static_cast<int>(parsed.tokens.size());
  std::vector<std::vector<int>> subjects(n), objects(n), obliques(n);
  std::vector<std::vector<int>> copulas(n);
  for (const auto& edge : parsed.dep_edges) {
    if (edge.head < 0) continue;
    if (is_subject_label(edge.label)) subjects[edge.head].push_back(edge.dep);
    else if (is_object_label(edge.label)) objects[edge.head].push_back(edge.dep);
    else if (is_oblique_label(edge.label)) obliques[edge.head].push_back(edge.dep);
    else if (edge.label == "cop") copulas[edge.head].push_back(edge.dep);
  }

  std::vector<SRTTriple> out;
  for (int head = 0; head < n; ++head) {
    if (subjects[head].empty()) continue;
    for (int subj : subjects[head]) {
      for (int obj : objects[head]) {
        if (subj == head || obj == head || subj == obj) continue;
        out.push_back(make_triple(parsed, subj, head, obj));
      }
      if (!opts.enable_fallback_patterns) continue;
      // Copula: "X <be> Y" parses with Y as head; the copula verb becomes
      // the relation and Y the target.
      for (int cop : copulas[head]) {
        if (subj == head || cop == head || subj == cop) continue;
        SRTTriple t = make_triple(parsed, subj, cop, head);
        out.push_back(std::move(t));
      }
      // Prepositional fallback: no direct object, take oblique dependents.
      if (objects[head].empty()) {
        for (int obl : obliques[head]) {
          if (subj == head || obl == head || subj == obl) continue;
          out.push_back(make_triple(parsed, subj, head, obl));
        }
      }
    }
  }
  return out;
}

std::vector<SRTTriple> filter_by_lexicon(const std::vector<SRTTriple>& triples,
                                         const TerminologyLexicon& lexicon) {
  std::vector<SRTTriple> out;
  for (const auto& t : triples) {
    if (lexicon.contains(strip_outer_punct(t.source)) &&
        lexicon.contains(strip_outer_punct(t.target))) {
      out.push_back(t);
    }
  }
  return out;
}

std::vector<SRTTriple> filter_by_predicate(
    const std::vector<SRTTriple>& triples, const PredicateCatalog& catalog) {
  std::vector<SRTTriple> out;
  for (const auto& t : triples) {
    if (catalog.contains(t.lemma)) out.push_back(t);
  }
  return out;
}

std::vector<SRTTriple> filter_triples(const std::vector<SRTTriple>& triples,
                                      const TerminologyLexicon& lexicon,
                                      const PredicateCatalog& catalog) {
  return filter_by_predicate(filter_by_lexicon(triples, lexicon), catalog);
}

std::string triple_to_json(const SRTTriple& t) {
  json j = {{"source", t.source},
            {"relation", t.relation},
            {"lemma", t.lemma},
            {"target", t.target},
            {"sentence", t.sentence_text},
            {"sentence_id", t.sentence_id},
            {"spans",
             {{"source", {t.source_span.begin, t.source_span.end}},
              {"relation", {t.relation_span.begin, t.relation_span.end}},
              {"target", {t.target_span.begin, t.target_span.end}}}}};
  return j.dump();
}

SRTTriple triple_from_json(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(Err::Parse, "malformed triple JSON");
  }
  SRTTriple t;
  t.source = j.at("source").get<std::string>();
  t.relation = j.at("relation").get<std::string>();
  t.lemma = j.at("lemma").get<std::string>();
  t.target = j.at("target").get<std::string>();
  t.sentence_text = j.value("sentence", "");
  t.sentence_id = j.value("sentence_id", "");
  const auto& spans = j.at("spans");
  auto span = [&](const char* key) {
    const auto& s = spans.at(key);
    return TokenSpan{s[0].get<int>(), s[1].get<int>()};
  };
  t.source_span = span("source");
  t.relation_span = span("relation");
  t.target_span = span("target");
  return t;
}

void write_triples_jsonl(const std::vector<SRTTriple>& triples,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Err::Io, "cannot write " + path);
  for (const auto& t : triples) out << triple_to_json(t) << '\n';
}

std::vector<SRTTriple> read_triples_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::Io, "cannot open triples: " + path);
  std::vector<SRTTriple> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(triple_from_json(line));
  }
  return out;
}

}  // namespace specmine
