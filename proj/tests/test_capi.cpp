#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "specmine.h"

namespace fs = std::filesystem;

namespace {

const std::string kFixtures = SPECMINE_FIXTURE_DIR;

struct Handle {
  sm_pipeline* p = sm_pipeline_new();
  ~Handle() { sm_pipeline_free(p); }
};

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("specmine_capi_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("handle lifecycle and config access") {
  Handle h;
  REQUIRE(h.p != nullptr);
  CHECK(std::string(sm_pipeline_last_error(h.p)) == "");

  CHECK(sm_pipeline_set(h.p, "seed", "9") == SM_OK);
  CHECK(std::string(sm_pipeline_get(h.p, "seed")) == "9");

  // Defaults and the tiny profile resolve through the C surface.
  CHECK(std::string(sm_pipeline_get(h.p, "hidden_dim")) == "768");
  CHECK(sm_pipeline_set(h.p, "tiny", "true") == SM_OK);
  CHECK(std::string(sm_pipeline_get(h.p, "hidden_dim")) == "32");

  CHECK(sm_pipeline_set(h.p, "bogus_key", "1") == SM_ERR_CONFIG);
  CHECK(std::string(sm_pipeline_last_error(h.p)).find("bogus_key") !=
        std::string::npos);
  CHECK(sm_pipeline_get(h.p, "bogus_key") == nullptr);

  // Free of a null handle is a no-op.
  sm_pipeline_free(nullptr);
}

TEST_CASE("config files load through the C surface") {
  TempDir tmp("cfg");
  const auto path = tmp.path / "run.conf";
  {
    std::ofstream out(path);
    out << "seed = 123\nvariant = disjoint\n";
  }
  Handle h;
  CHECK(sm_pipeline_load_config(h.p, path.string().c_str()) == SM_OK);
  CHECK(std::string(sm_pipeline_get(h.p, "seed")) == "123");
  CHECK(sm_pipeline_load_config(h.p, "/nonexistent/x.conf") == SM_ERR_IO);
}

TEST_CASE("catalog helpers answer without a handle") {
  CHECK(sm_catalog_predicate_count() == 23);

  char buf[64];
  REQUIRE(sm_catalog_category("include", buf, sizeof(buf)) == SM_OK);
  CHECK(std::string(buf) == "Belong");
  REQUIRE(sm_catalog_category("verify", buf, sizeof(buf)) == SM_OK);
  CHECK(std::string(buf) == "Integrity");
  CHECK(sm_catalog_category("schedule", buf, sizeof(buf)) == SM_ERR_CONFIG);

  REQUIRE(sm_lemmatize("includes", buf, sizeof(buf)) == SM_OK);
  CHECK(std::string(buf) == "include");
  REQUIRE(sm_lemmatize("built", buf, sizeof(buf)) == SM_OK);
  CHECK(std::string(buf) == "build");

  char tiny_buf[3];
  CHECK(sm_lemmatize("includes", tiny_buf, sizeof(tiny_buf)) ==
        SM_ERR_INTERNAL);
}

TEST_CASE("pipeline stages run through the C API") {
  TempDir tmp("run");
  Handle h;
  sm_pipeline_set(h.p, "out_dir", tmp.path.string().c_str());
  sm_pipeline_set(h.p, "tables", (kFixtures + "/tables.jsonl").c_str());
  sm_pipeline_set(h.p, "stopwords", (kFixtures + "/stopwords.txt").c_str());
  sm_pipeline_set(h.p, "domain_exclude",
                  (kFixtures + "/domain_exclude.txt").c_str());
  sm_pipeline_set(h.p, "sentences", (kFixtures + "/sentences.txt").c_str());
  sm_pipeline_set(h.p, "backend", "fixture");
  sm_pipeline_set(h.p, "backend_fixtures",
                  (kFixtures + "/parsed.jsonl").c_str());

  CHECK(sm_run_ingest(h.p) == SM_OK);
  CHECK(fs::exists(tmp.path / "lexicon.txt"));
  CHECK(sm_run_extract(h.p) == SM_OK);
  CHECK(fs::exists(tmp.path / "triples.jsonl"));
  CHECK(sm_run_build_dataset(h.p) == SM_OK);
  CHECK(sm_run_export(h.p) == SM_OK);
  CHECK(fs::exists(tmp.path / "dependency_table.csv"));

  char* report = nullptr;
  REQUIRE(sm_run_report(h.p, &report) == SM_OK);
  REQUIRE(report != nullptr);
  CHECK(std::string(report).find("\"raw_groups\": 18") != std::string::npos);
  sm_free(report);
}

TEST_CASE("stage errors surface as codes plus messages") {
  TempDir tmp("err");
  Handle h;
  sm_pipeline_set(h.p, "out_dir", tmp.path.string().c_str());

  // ingest without tables.
  CHECK(sm_run_ingest(h.p) == SM_ERR_CONFIG);
  CHECK(std::string(sm_pipeline_last_error(h.p)).find("tables") !=
        std::string::npos);

  // report before any stage ran.
  char* report = nullptr;
  CHECK(sm_run_report(h.p, &report) == SM_ERR_STATE);
  CHECK(report == nullptr);

  // extract against a missing fixture file is a backend problem.
  sm_pipeline_set(h.p, "tables", (kFixtures + "/tables.jsonl").c_str());
  CHECK(sm_run_ingest(h.p) == SM_OK);
  sm_pipeline_set(h.p, "sentences", (kFixtures + "/sentences.txt").c_str());
  sm_pipeline_set(h.p, "backend_fixtures", "/nonexistent/parses.jsonl");
  CHECK(sm_run_extract(h.p) == SM_ERR_BACKEND);

  // A later success clears the error text.
  sm_pipeline_set(h.p, "backend_fixtures",
                  (kFixtures + "/parsed.jsonl").c_str());
  CHECK(sm_run_extract(h.p) == SM_OK);
  CHECK(std::string(sm_pipeline_last_error(h.p)) == "");
}

TEST_CASE("version string is present") {
  CHECK(std::strlen(sm_version()) > 0);
}
