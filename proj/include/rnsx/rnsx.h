/* Copyright 2026 The rnsx Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/* C interface to the rnsx library.
 *
 * Every call returns an rnsx_status; on failure rnsx_last_error() describes
 * the problem (thread-local, valid until the next call on the thread).
 * Strings returned through char** are heap-allocated and released with
 * rnsx_free_string(). */

#ifndef RNSX_RNSX_H_
#define RNSX_RNSX_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RNSX_API __declspec(dllexport)
#else
#define RNSX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  RNSX_OK = 0,
  RNSX_ERR_USAGE = 1,   /* bad arguments or configuration */
  RNSX_ERR_DATA = 2,    /* unreadable, malformed or inconsistent input */
  RNSX_ERR_NUMERIC = 3, /* divergence or numerical failure */
} rnsx_status;

typedef struct rnsx_model rnsx_model;

RNSX_API const char* rnsx_version(void);
RNSX_API const char* rnsx_last_error(void);
RNSX_API void rnsx_free_string(char* s);

/* Trains one configuration; writes checkpoint, predictions and reports into
 * out_dir. report_json / report_table may be NULL. */
RNSX_API rnsx_status rnsx_train(const char* config_path, const char* data_dir,
                                const char* out_dir, char** report_json, char** report_table);

/* Grid search over the config's "grid_axes"; one subdirectory per cell. */
RNSX_API rnsx_status rnsx_grid(const char* config_path, const char* data_dir,
                               const char* out_dir, char** report_json, char** report_table);

RNSX_API rnsx_status rnsx_model_load(const char* checkpoint_path, rnsx_model** out);
RNSX_API void rnsx_model_free(rnsx_model* model);

/* Scores a labelled corpus file in the model's task format. When
 * predictions_path is non-NULL the per-example predictions are written
 * there as TSV. */
RNSX_API rnsx_status rnsx_evaluate(const rnsx_model* model, const char* data_path,
                                   const char* predictions_path, double* accuracy,
                                   char** report_json, char** report_table);

/* Decodes trees for the sentences in input_path (one per line) into
 * out_path (ten-column treebank format); marginal matrices go to
 * marginals_path when it is non-NULL. */
RNSX_API rnsx_status rnsx_dump_trees(const rnsx_model* model, const char* input_path,
                                     const char* out_path, const char* marginals_path,
                                     size_t* sentences);

/* Paired approximate randomization test over two prediction files. */
RNSX_API rnsx_status rnsx_sigtest(const char* a_path, const char* b_path, size_t rounds,
                                  uint64_t seed, double* p_value, char** report_json,
                                  char** report_table);

/* Same test over raw per-example scores. */
RNSX_API rnsx_status rnsx_randomization_test(const double* a, const double* b, size_t n,
                                             size_t rounds, uint64_t seed, double* p_value);

#ifdef __cplusplus
}
#endif

#endif /* RNSX_RNSX_H_ */
