// Copyright 2026 The superpose Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/* C interface to the superpose library. All handles are opaque; every
 * fallible call returns an sp_status and leaves a message retrievable with
 * sp_last_error() on the calling thread. Strings returned by the library stay
 * valid until the owning handle is freed. */

#ifndef SUPERPOSE_SUPERPOSE_H_
#define SUPERPOSE_SUPERPOSE_H_

#include <stdint.h>

#if defined(SUPERPOSE_BUILDING_LIBRARY)
#define SP_API __attribute__((visibility("default")))
#else
#define SP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sp_status {
  SP_OK = 0,
  SP_INVALID_ARGUMENT = 1,
  SP_INVALID_CONFIG = 2,
  SP_INFEASIBLE = 3,
  SP_IO = 4,
  SP_NUMERICAL = 5,
  SP_DECODE_FAILURE = 6,
  SP_INTERNAL = 7
} sp_status;

typedef enum sp_table {
  SP_TABLE_TRIALS = 0,
  SP_TABLE_SCHEDULE = 1,
  SP_TABLE_ENVELOPE = 2,
  SP_TABLE_TRACE = 3
} sp_table;

typedef struct sp_experiment sp_experiment;
typedef struct sp_report sp_report;

SP_API const char* sp_version(void);
SP_API const char* sp_status_string(sp_status status);
SP_API const char* sp_last_error(void);

/* Parses and validates a JSON experiment description. */
SP_API sp_status sp_experiment_create(const char* json, sp_experiment** out);
/* Normalized configuration, every field present. */
SP_API const char* sp_experiment_config(const sp_experiment* exp);
SP_API void sp_experiment_free(sp_experiment* exp);

/* Bound evaluation. On SP_INFEASIBLE a report with diagnostics is still
 * returned through `out` and must be freed. */
SP_API sp_status sp_run_bounds(const sp_experiment* exp, sp_report** out);
SP_API sp_status sp_run_simulate(const sp_experiment* exp, sp_report** out);
SP_API sp_status sp_run_envelope(const sp_experiment* exp, sp_report** out);
/* Single decode with a per-step trace. */
SP_API sp_status sp_run_demo(const sp_experiment* exp, sp_report** out);

SP_API const char* sp_report_json(const sp_report* report);
/* CSV text of a table, or NULL when the run did not produce it. */
SP_API const char* sp_report_csv(const sp_report* report, sp_table table);
/* Writes every produced table and the JSON summary to the output paths of
 * the experiment; empty paths are skipped. */
SP_API sp_status sp_report_write(const sp_report* report);
SP_API void sp_report_free(sp_report* report);

SP_API sp_status sp_channel_capacity(double snr, double* nats, double* bits);
/* Writes the dictionary for (L, M, rate in nats, seed) in the binary layout:
 * uint32 n, uint32 N, then n*N little-endian float64 in row-major order. */
SP_API sp_status sp_dictionary_export(uint64_t L, uint64_t M, double rate_nats,
                                      uint64_t seed, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* SUPERPOSE_SUPERPOSE_H_ */
