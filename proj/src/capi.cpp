#include "specmine.h"

#include <cstring>
#include <new>
#include <string>

#include "catalog.hpp"
#include "common.hpp"
#include "pipeline.hpp"

using specmine::Err;
using specmine::Error;

struct sm_pipeline {
  specmine::PipelineConfig config;
  std::string last_error;
  std::string get_buffer;
};

namespace {

sm_code map_code(Err code) {
  switch (code) {
    case Err::Config: return SM_ERR_CONFIG;
    case Err::Io: return SM_ERR_IO;
    case Err::Parse:
    case Err::ParseFailure:
    case Err::SpanConflict:
    case Err::TooLong:
    case Err::SequenceTooLong: return SM_ERR_PARSE;
    case Err::BackendUnavailable: return SM_ERR_BACKEND;
    case Err::State:
    case Err::EmptySplit: return SM_ERR_STATE;
    case Err::Divergence:
    case Err::ShapeMismatch:
    case Err::AllIgnored:
    case Err::EmptyBatch: return SM_ERR_TRAIN;
    case Err::Internal: return SM_ERR_INTERNAL;
  }
  return SM_ERR_INTERNAL;
}

template <typename Fn>
sm_code guarded(sm_pipeline* p, Fn&& fn) {
  if (!p) return SM_ERR_INTERNAL;
  try {
    fn();
    p->last_error.clear();
    return SM_OK;
  } catch (const Error& err) {
    p->last_error = std::string(specmine::err_name(err.code())) + ": " +
                    err.what();
    return map_code(err.code());
  } catch (const std::exception& ex) {
    p->last_error = ex.what();
    return SM_ERR_INTERNAL;
  }
}

sm_code copy_to_buffer(const std::string& value, char* buf, size_t buflen) {
  if (!buf || buflen <= value.size()) return SM_ERR_INTERNAL;
  std::memcpy(buf, value.c_str(), value.size() + 1);
  return SM_OK;
}

}  // namespace

extern "C" {

sm_pipeline* sm_pipeline_new(void) {
  return new (std::nothrow) sm_pipeline();
}

void sm_pipeline_free(sm_pipeline* p) { delete p; }

sm_code sm_pipeline_set(sm_pipeline* p, const char* key, const char* value) {
  if (!key || !value) return SM_ERR_CONFIG;
  return guarded(p, [&] { p->config.set(key, value); });
}

sm_code sm_pipeline_load_config(sm_pipeline* p, const char* path) {
  if (!path) return SM_ERR_CONFIG;
  return guarded(p, [&] { p->config.load_file(path); });
}

const char* sm_pipeline_get(sm_pipeline* p, const char* key) {
  if (!p || !key) return nullptr;
  try {
    p->get_buffer = p->config.get(key);
    return p->get_buffer.c_str();
  } catch (const std::exception&) {
    return nullptr;
  }
}

const char* sm_pipeline_last_error(const sm_pipeline* p) {
  return p ? p->last_error.c_str() : "";
}

sm_code sm_run_ingest(sm_pipeline* p) {
  return guarded(p, [&] { specmine::run_ingest(p->config); });
}

sm_code sm_run_extract(sm_pipeline* p) {
  return guarded(p, [&] { specmine::run_extract(p->config); });
}

sm_code sm_run_build_dataset(sm_pipeline* p) {
  return guarded(p, [&] { specmine::run_build_dataset(p->config); });
}

sm_code sm_run_synth(sm_pipeline* p) {
  return guarded(p, [&] { specmine::run_synth(p->config); });
}

sm_code sm_run_train(sm_pipeline* p) {
  return guarded(p, [&] { specmine::run_train(p->config); });
}

sm_code sm_run_eval(sm_pipeline* p) {
  return guarded(p, [&] { specmine::run_eval(p->config); });
}

sm_code sm_run_export(sm_pipeline* p) {
  return guarded(p, [&] { specmine::run_export(p->config); });
}

sm_code sm_run_report(sm_pipeline* p, char** out_json) {
  if (!out_json) return SM_ERR_CONFIG;
  *out_json = nullptr;
  return guarded(p, [&] {
    const std::string text = specmine::run_report(p->config);
    char* owned = static_cast<char*>(::operator new(text.size() + 1));
    std::memcpy(owned, text.c_str(), text.size() + 1);
    *out_json = owned;
  });
}

void sm_free(void* ptr) { ::operator delete(ptr); }

int sm_catalog_predicate_count(void) {
  return static_cast<int>(specmine::PredicateCatalog::instance().size());
}

sm_code sm_catalog_category(const char* predicate, char* buf, size_t buflen) {
  if (!predicate) return SM_ERR_CONFIG;
  const auto& catalog = specmine::PredicateCatalog::instance();
  if (!catalog.contains(predicate)) return SM_ERR_CONFIG;
  return copy_to_buffer(
      specmine::category_name(catalog.category(predicate)), buf, buflen);
}

sm_code sm_lemmatize(const char* word, char* buf, size_t buflen) {
  if (!word) return SM_ERR_CONFIG;
  return copy_to_buffer(specmine::lemmatize(word), buf, buflen);
}

const char* sm_version(void) { return "0.1.0"; }

}  // extern "C"
