/* Copyright (c) 2026 The catn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#ifndef CATN_CATN_H
#define CATN_CATN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(CATN_BUILDING_LIBRARY)
#define CATN_API __attribute__((visibility("default")))
#else
#define CATN_API
#endif

/* Status codes double as CLI exit codes. */
typedef enum catn_status {
  CATN_OK = 0,
  CATN_CONFIG_ERROR = 1,
  CATN_DATA_ERROR = 2,
  CATN_DIVERGENCE = 3,
  CATN_INTERNAL_ERROR = 4
} catn_status;

typedef struct catn_config catn_config;
typedef struct catn_model catn_model;

CATN_API const char* catn_version(void);
/* Message of the last failed call on this thread; "" when none. */
CATN_API const char* catn_last_error(void);

CATN_API catn_config* catn_config_new(void);
CATN_API void catn_config_free(catn_config* cfg);
/* Reads a "key = value" file; keys not in the file keep their values. */
CATN_API catn_status catn_config_load(catn_config* cfg, const char* path);
CATN_API catn_status catn_config_set(catn_config* cfg, const char* key, const char* value);
/* Copies the value with its terminator into buf when it fits; *needed
   receives the full length including the terminator. */
CATN_API catn_status catn_config_get(const catn_config* cfg, const char* key, char* buf,
                                     size_t capacity, size_t* needed);
CATN_API catn_status catn_config_validate(const catn_config* cfg);
CATN_API catn_status catn_config_save(const catn_config* cfg, const char* path);

CATN_API catn_status catn_synth(const catn_config* cfg, const char* out_dir);
CATN_API catn_status catn_prepare(const catn_config* cfg, const char* out_dir);
/* Progress lines go to stderr when verbose is non-zero. */
CATN_API catn_status catn_train(const catn_config* cfg, const char* run_dir, int verbose);
CATN_API catn_status catn_evaluate(const char* run_dir, int test_split, const char* out_json,
                                   double* mse, size_t* n_pairs);
CATN_API catn_status catn_explain(const char* run_dir, const char* user, const char* item,
                                  size_t top_k, const char* out_json, const char* out_csv);
CATN_API catn_status catn_gradcheck(uint64_t seed, double* max_rel_error, size_t* checked,
                                    double* seconds);

CATN_API catn_status catn_model_load(const char* checkpoint_path, catn_model** out);
CATN_API void catn_model_free(catn_model* model);
CATN_API catn_status catn_model_parameter_count(const catn_model* model, size_t* count);
CATN_API catn_status catn_model_variant(const catn_model* model, const char** name);
/* Writes the M x M correlation matrix row-major (rows = source aspects)
   when capacity >= M*M; *aspects receives M. */
CATN_API catn_status catn_model_correlation(const catn_model* model, double* out,
                                            size_t capacity, size_t* aspects);

#ifdef __cplusplus
}
#endif

#endif /* CATN_CATN_H */
