/*
 * Copyright 2026 The revlabel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef REVLABEL_H
#define REVLABEL_H

/*
 * C interface to the revlabel engine. All objects are opaque handles owned
 * by the caller and released with the matching *_destroy function. Every
 * fallible call returns an rl_status; on failure the context keeps a
 * human-readable message retrievable with rl_last_error().
 *
 * A context is not thread-safe; use one per thread.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define RL_API __declspec(dllexport)
#elif defined(__GNUC__)
#  define RL_API __attribute__((visibility("default")))
#else
#  define RL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rl_status {
  RL_OK = 0,
  RL_ERR_INVALID_ARGUMENT = 1,
  RL_ERR_UNREADABLE_FILE = 2,
  RL_ERR_MISSING_FIELD = 3,
  RL_ERR_DUPLICATE_ID = 4,
  RL_ERR_UNKNOWN_LABEL = 5,
  RL_ERR_SHOT_LABEL_UNKNOWN = 6,
  RL_ERR_SHOT_EQUALS_SAMPLE = 7,
  RL_ERR_INSUFFICIENT_CLASS_SAMPLES = 8,
  RL_ERR_AUTH_MISSING = 9,
  RL_ERR_RATE_LIMITED = 10,
  RL_ERR_TRANSPORT = 11,
  RL_ERR_MALFORMED_RESPONSE = 12,
  RL_ERR_FIXTURE_MISS = 13,
  RL_ERR_DUPLICATE_MODEL_PREDICTION = 14,
  RL_ERR_INSUFFICIENT_POOL = 15,
  RL_ERR_MISSING_APP_ID = 16,
  RL_ERR_UNKNOWN_RECORD = 17,
  RL_ERR_UNKNOWN_CLASS = 18,
  RL_ERR_EMPTY_INPUT = 19,
  RL_ERR_CLASS_TOO_SMALL = 20,
  RL_ERR_TRAINER_UNAVAILABLE = 21,
  RL_ERR_TRAINER_FAILED = 22,
  RL_ERR_VALIDATION = 23,
  RL_ERR_ALIAS_CONFLICT = 24,
  RL_ERR_SCHEMA_VIOLATION = 25,
  RL_ERR_INTERNAL = 26
} rl_status;

typedef struct rl_context rl_context;
typedef struct rl_dataset rl_dataset;
typedef struct rl_manifest rl_manifest;

RL_API const char* rl_version(void);
RL_API const char* rl_status_name(rl_status status);
/* 1 for validation errors, 2 for runtime errors, 0 for RL_OK. */
RL_API int rl_status_exit_code(rl_status status);

/* data_dir may be NULL for the default data directory. */
RL_API rl_context* rl_context_create(const char* data_dir);
RL_API void rl_context_destroy(rl_context* ctx);
RL_API const char* rl_last_error(const rl_context* ctx);

/* ---- text ---------------------------------------------------------------- */

/* Writes the space-joined cleaned tokens into buf (NUL-terminated, truncated
 * to cap). *needed receives the full length excluding the terminator. */
RL_API rl_status rl_clean_text(rl_context* ctx, const char* text, char* buf,
                               size_t cap, size_t* needed);
RL_API int rl_is_eligible(const char* text);

/* ---- datasets ------------------------------------------------------------ */

/* format: "csv" | "jsonl"; source: "app_store" | "forum" | "x". */
RL_API rl_status rl_dataset_ingest(rl_context* ctx, const char* path,
                                   const char* format, const char* dataset_id,
                                   const char* source, int labeled,
                                   rl_dataset** out);
/* Reads a dataset written by rl_dataset_write. */
RL_API rl_status rl_dataset_load(rl_context* ctx, const char* path,
                                 rl_dataset** out);
RL_API rl_status rl_dataset_write(rl_context* ctx, const rl_dataset* ds,
                                  const char* path);
RL_API void rl_dataset_destroy(rl_dataset* ds);
RL_API size_t rl_dataset_size(const rl_dataset* ds);

RL_API rl_status rl_dataset_filter_eligible(rl_context* ctx, rl_dataset* ds,
                                            size_t* removed);
RL_API rl_status rl_dataset_dedup(rl_context* ctx, rl_dataset* primary,
                                  const rl_dataset* reference,
                                  size_t* removed);
/* Loads mappings/<mapping_id>.map from the context's data directory. */
RL_API rl_status rl_dataset_adapt(rl_context* ctx, rl_dataset* ds,
                                  const char* mapping_id, size_t* dropped);

/* Splits ds into shots (written to shots_path as jsonl) and the residual
 * dataset, which replaces the contents of ds. */
RL_API rl_status rl_dataset_select_shots(rl_context* ctx, rl_dataset* ds,
                                         const char* scheme_id,
                                         size_t per_class, uint64_t seed,
                                         const char* shots_path);

/* Writes record_id/fold pairs as jsonl. */
RL_API rl_status rl_dataset_make_folds(rl_context* ctx, const rl_dataset* ds,
                                       size_t k, uint64_t seed,
                                       const char* out_path);

/* Scores a predictions file against ds under scheme_id and writes one
 * metrics object per class plus the macro average. */
RL_API rl_status rl_evaluate(rl_context* ctx, const rl_dataset* truth,
                             const char* scheme_id,
                             const char* predictions_path,
                             const char* metrics_path);

/* Renders a metrics.jsonl file as a report; format: "markdown" | "csv". */
RL_API rl_status rl_report(rl_context* ctx, const char* metrics_path,
                           const char* format, const char* out_path);

/* ---- manifest-driven runs ------------------------------------------------ */

RL_API rl_status rl_manifest_load(rl_context* ctx, const char* path,
                                  rl_manifest** out);
RL_API void rl_manifest_destroy(rl_manifest* manifest);
RL_API void rl_manifest_set_seed(rl_manifest* manifest, uint64_t seed);
RL_API rl_status rl_manifest_validate(rl_context* ctx,
                                      const rl_manifest* manifest);

RL_API rl_status rl_run_classify(rl_context* ctx, const rl_manifest* manifest,
                                 const char* out_dir);
RL_API rl_status rl_run_consensus(rl_context* ctx, const rl_manifest* manifest,
                                  const char* out_dir);
RL_API rl_status rl_run_augment(rl_context* ctx, const rl_manifest* manifest,
                                const char* out_dir);
RL_API rl_status rl_run_all(rl_context* ctx, const rl_manifest* manifest,
                            const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* REVLABEL_H */
