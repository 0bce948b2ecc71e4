/*
 * Copyright 2026 The convosim Authors
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

/*
 * C interface to the convosim pipeline. All functions are thread-compatible:
 * distinct pipeline handles may be used from distinct threads, a single
 * handle must not be shared without external synchronization.
 *
 * Reports are returned as heap-allocated JSON strings; release them with
 * convosim_string_free. On failure the return code maps 1:1 onto the CLI
 * exit codes and convosim_last_error holds a message until the next call on
 * the same handle.
 */

#ifndef CONVOSIM_H
#define CONVOSIM_H

#include <stddef.h>

#if defined(_WIN32)
#define CONVOSIM_API __declspec(dllexport)
#else
#define CONVOSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct convosim_pipeline convosim_pipeline;

typedef enum convosim_status {
    CONVOSIM_OK = 0,
    CONVOSIM_ERR_RUNTIME = 1,      /* backend/runtime failure */
    CONVOSIM_ERR_INVALID_INPUT = 2 /* bad config, paths, or data */
} convosim_status;

CONVOSIM_API const char* convosim_version(void);

/*
 * Builds a pipeline from a JSON config file plus an optional JSON object of
 * overrides (same keys). Either argument may be NULL: config_path NULL
 * starts from defaults, overrides_json NULL applies nothing. A handle is
 * returned even on failure so convosim_last_error can be read; the caller
 * always destroys it.
 */
CONVOSIM_API convosim_status convosim_pipeline_create(const char* config_path,
                                                      const char* overrides_json,
                                                      convosim_pipeline** out);

CONVOSIM_API void convosim_pipeline_destroy(convosim_pipeline* pipeline);

/* Message of the last failed call on this handle; empty string if none. */
CONVOSIM_API const char* convosim_last_error(const convosim_pipeline* pipeline);

/* Effective config as a JSON document. */
CONVOSIM_API convosim_status convosim_effective_config(convosim_pipeline* pipeline,
                                                       char** config_json);

CONVOSIM_API convosim_status convosim_run_ingest(convosim_pipeline* pipeline,
                                                 char** report_json);

CONVOSIM_API convosim_status convosim_run_generate(convosim_pipeline* pipeline, int dry_run,
                                                   char** manifest_json);

CONVOSIM_API convosim_status convosim_run_judge(convosim_pipeline* pipeline,
                                                const char* dataset_path, char** report_json);

CONVOSIM_API convosim_status convosim_run_stats(convosim_pipeline* pipeline,
                                                const char* dataset_path, char** stats_json);

CONVOSIM_API convosim_status convosim_run_ablate(convosim_pipeline* pipeline,
                                                 const char* const* dataset_paths,
                                                 size_t dataset_count, int use_stored_goals,
                                                 char** report_json);

CONVOSIM_API void convosim_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* CONVOSIM_H */
