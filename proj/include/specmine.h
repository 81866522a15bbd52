/* specmine C API: protocol-specification mining pipeline behind a stable
 * shared-library boundary. Handles are opaque; every stage call returns an
 * sm_code and leaves a readable message in sm_pipeline_last_error(). */
#ifndef SPECMINE_H
#define SPECMINE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sm_code {
  SM_OK = 0,
  SM_ERR_CONFIG = 1,   /* bad or missing configuration value */
  SM_ERR_IO = 2,       /* file missing, unreadable, or unwritable */
  SM_ERR_PARSE = 3,    /* malformed input data */
  SM_ERR_BACKEND = 4,  /* dependency-parser backend unavailable */
  SM_ERR_STATE = 5,    /* stage needs artifacts another stage produces */
  SM_ERR_TRAIN = 6,    /* training diverged or was set up inconsistently */
  SM_ERR_INTERNAL = 7
} sm_code;

typedef struct sm_pipeline sm_pipeline;

sm_pipeline* sm_pipeline_new(void);
void sm_pipeline_free(sm_pipeline* p);

/* key=value configuration; unknown keys are SM_ERR_CONFIG. */
sm_code sm_pipeline_set(sm_pipeline* p, const char* key, const char* value);
sm_code sm_pipeline_load_config(sm_pipeline* p, const char* path);
/* Resolved value (defaults and the tiny profile applied); NULL on unknown
 * key. The returned pointer stays valid until the next call on p. */
const char* sm_pipeline_get(sm_pipeline* p, const char* key);

/* Empty string when the previous call succeeded. */
const char* sm_pipeline_last_error(const sm_pipeline* p);

/* Pipeline stages. Artifacts land under the configured out_dir. */
sm_code sm_run_ingest(sm_pipeline* p);
sm_code sm_run_extract(sm_pipeline* p);
sm_code sm_run_build_dataset(sm_pipeline* p);
sm_code sm_run_synth(sm_pipeline* p);
sm_code sm_run_train(sm_pipeline* p);
sm_code sm_run_eval(sm_pipeline* p);
sm_code sm_run_export(sm_pipeline* p);

/* Consolidated funnel report as JSON; free with sm_free. */
sm_code sm_run_report(sm_pipeline* p, char** out_json);
void sm_free(void* ptr);

/* Stateless catalog helpers. */
int sm_catalog_predicate_count(void); /* 23 */
/* Security category of a predicate lemma into buf; SM_ERR_CONFIG when the
 * word is not in the catalog, SM_ERR_INTERNAL when buf is too small. */
sm_code sm_catalog_category(const char* predicate, char* buf, size_t buflen);
/* Rule-table lemmatization of a relation word. */
sm_code sm_lemmatize(const char* word, char* buf, size_t buflen);

const char* sm_version(void);

#ifdef __cplusplus
}
#endif

#endif /* SPECMINE_H */
