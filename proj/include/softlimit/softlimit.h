// Copyright 2026 The softlimit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOFTLIMIT_SOFTLIMIT_H
#define SOFTLIMIT_SOFTLIMIT_H

/* C interface to the soft inductive limit library.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every call returns an sl_status; on failure
 * sl_last_error() describes the problem for the calling thread. Strings
 * returned through char** out-parameters are released with sl_string_free.
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define SL_API __declspec(dllexport)
#else
#define SL_API __attribute__((visibility("default")))
#endif

typedef enum sl_status {
  SL_OK = 0,
  SL_NOT_SQUARE = 1,
  SL_NOT_HERMITIAN = 2,
  SL_SHAPE_MISMATCH = 3,
  SL_NOT_IN_SPAN = 4,
  SL_INCONSISTENT_ACTION = 5,
  SL_DIMENSION_MISMATCH = 6,
  SL_FLAG_VIOLATION = 7,
  SL_HORIZON_TOO_SHORT = 8,
  SL_NOT_STRICT = 9,
  SL_NOT_SELF_ADJOINT = 10,
  SL_SOLVER_FAILURE = 11,
  SL_NUMERICAL_FAILURE = 12,
  SL_PARSE_ERROR = 13,
  SL_CONFIG_INVALID = 14,
  SL_BAD_GRID = 15,
  SL_INVALID_ARGUMENT = 16,
  SL_INTERNAL = 99
} sl_status;

typedef struct sl_system sl_system;
typedef struct sl_map sl_map;

SL_API const char* sl_version(void);
/* Message of the last failed call on this thread ("" if none). */
SL_API const char* sl_last_error(void);
SL_API void sl_string_free(char* s);

/* Soft systems. `name` is "uhf", "perturbed" or "interval"; `params_json`
 * holds the builtin parameters (may be NULL for defaults). */
SL_API sl_status sl_system_builtin(const char* name, const char* params_json, sl_system** out);
SL_API sl_status sl_system_load_json(const char* json, sl_system** out);
SL_API sl_status sl_system_to_json(const sl_system* sys, char** out_json);
SL_API sl_status sl_system_horizon(const sl_system* sys, size_t* out);
SL_API sl_status sl_system_strictify(const sl_system* sys, sl_system** out);
/* Exact transitivity residual (max Choi distance). */
SL_API sl_status sl_system_residual(const sl_system* sys, double* out);
/* Defect CSV (m,n,l,probe_id,defect,norm_kind) for norm "pointwise",
 * "interval" or "cb". */
SL_API sl_status sl_system_defects_csv(const sl_system* sys, const char* norm, char** out_csv);
SL_API void sl_system_free(sl_system* sys);

/* Maps. The stored map j_nm of a system (n > m), or a map bundle. */
SL_API sl_status sl_system_map(const sl_system* sys, size_t n, size_t m, sl_map** out);
SL_API sl_status sl_map_from_json(const char* json, sl_map** out);
SL_API sl_status sl_map_to_json(const sl_map* map, char** out_json);
/* Difference a - b of two maps with the same shape. */
SL_API sl_status sl_map_subtract(const sl_map* a, const sl_map* b, sl_map** out);
/* Flags: bit 0 cp, bit 1 unital, bit 2 ucp, bit 3 cpc. */
SL_API sl_status sl_map_verify(const sl_map* map, int* flags, double* min_choi_eig);
SL_API sl_status sl_map_cb_norm(const sl_map* map, double* out);
SL_API sl_status sl_map_norm_interval(const sl_map* map, unsigned long long seed, double* lower,
                                      double* upper);
SL_API void sl_map_free(sl_map* map);

/* Runs an experiment described by a JSON config, writing CSVs under
 * out_dir when non-NULL (overriding the config's "out"). Returns the
 * process exit code: 0 success, 2 invalid input, 3 numerical failure,
 * 4 horizon too short. */
SL_API int sl_run_experiment(const char* config_json, const char* out_dir);

/* parse -> serialize -> parse fixed point check of a JSON bundle file. */
SL_API sl_status sl_roundtrip_file(const char* path, int* fixed_point);

#ifdef __cplusplus
}
#endif

#endif /* SOFTLIMIT_SOFTLIMIT_H */
