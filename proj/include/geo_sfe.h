/*
 * Copyright 2026 The geo-sfe Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the geo-sfe structural optimization library.
 *
 * All functions return a geosfe_status; results are UTF-8 strings (mostly
 * JSON) allocated by the library and released with geosfe_string_free().
 * Handles are opaque and not thread-safe for concurrent mutation; distinct
 * handles are independent.
 */

#ifndef GEO_SFE_H
#define GEO_SFE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct geosfe_engine geosfe_engine;

typedef enum geosfe_status {
  GEOSFE_OK = 0,
  GEOSFE_ERR_INVALID_ARG = 1,
  GEOSFE_ERR_PARSE = 2,        /* malformed or oversized input */
  GEOSFE_ERR_BAD_CONFIG = 3,   /* config/stats/alpha rejected */
  GEOSFE_ERR_MAPPING = 4,      /* sentence mapping unavailable/incomplete */
  GEOSFE_ERR_EMPTY_INPUT = 5,  /* empty corpus or query set */
  GEOSFE_ERR_PROVIDER = 6,     /* similarity provider unreachable */
  GEOSFE_ERR_INTERNAL = 7
} geosfe_status;

/* config_json may be NULL or "{}" for defaults. */
geosfe_status geosfe_engine_create(const char* config_json, geosfe_engine** out);
void geosfe_engine_destroy(geosfe_engine* engine);

/* Last error message for this handle; empty string when none. The pointer
 * stays valid until the next call on the same handle. */
const char* geosfe_last_error(const geosfe_engine* engine);

const char* geosfe_version(void);

void geosfe_string_free(char* s);

/* Corpus feature statistics: JSON {means:[15], stds:[15], n, doc_freq?}. */
geosfe_status geosfe_load_stats(geosfe_engine* engine, const char* stats_json);

/* 15-dimension structural feature report:
 * {raw:{...}, normalized?:{...}, diagnostics:[...]}. */
geosfe_status geosfe_extract(geosfe_engine* engine, const char* markdown,
                             char** report_json);

/* Structural optimization. Outputs: canonical markdown, a JSON-lines edit
 * log, and a summary {final_mode, p_before, p_after, verdict, mapping}. */
geosfe_status geosfe_optimize(geosfe_engine* engine, const char* markdown,
                              char** markdown_out, char** log_jsonl,
                              char** summary_json);

/* Semantic preservation verdict between two documents. mapping_json may be
 * NULL: the identity mapping is used when sentence counts agree. */
geosfe_status geosfe_check(geosfe_engine* engine, const char* original_md,
                           const char* transformed_md, const char* mapping_json,
                           char** verdict_json);

/* Citation simulation over a corpus. ids/docs are parallel arrays.
 * queries_json: [{id, text, sub_queries?}]. */
geosfe_status geosfe_evaluate(geosfe_engine* engine, const char* const* ids,
                              const char* const* docs, size_t n,
                              const char* queries_json, char** report_json);

/* Per-level ablation: baseline, full, and leave-one-level-out runs. */
geosfe_status geosfe_ablate(geosfe_engine* engine, const char* const* ids,
                            const char* const* docs, size_t n,
                            const char* queries_json, char** report_json);

/* Corpus stats (means/stds/doc_freq) computed from documents. */
geosfe_status geosfe_compute_stats(geosfe_engine* engine, const char* const* ids,
                                   const char* const* docs, size_t n,
                                   char** stats_json);

#ifdef __cplusplus
}
#endif

#endif /* GEO_SFE_H */
