/*
 * bilevel-rt - Copyright 2026 the bilevel-rt authors.
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the bilevel fluence-map optimization engine. All entry
 * points return a brt_status; on failure brt_last_error() yields a
 * thread-local description of what went wrong. Objects returned through
 * out-parameters are owned by the caller and released with the matching
 * *_close function.
 */
#ifndef BILEVELRT_H
#define BILEVELRT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BRT_API __declspec(dllexport)
#else
#define BRT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as CLI exit codes. */
typedef enum brt_status {
  BRT_OK = 0,
  BRT_ERR_INTERNAL = 1,
  BRT_ERR_CONFIG = 2,           /* invalid input or configuration */
  BRT_ERR_NUMERIC = 3,          /* numerical abort inside the optimizer */
  BRT_ERR_MISSING_ARTIFACT = 4, /* expected upstream file not found */
} brt_status;

BRT_API const char* brt_version(void);

/* Message for the most recent failure on the calling thread; empty string
 * when the last call succeeded. */
BRT_API const char* brt_last_error(void);

typedef struct brt_case brt_case;
typedef struct brt_plan brt_plan;
typedef struct brt_archive brt_archive;
typedef struct brt_front brt_front;

/* ---- options -------------------------------------------------------- */

/* Negative numeric fields and smoothing < 0 mean "inherit the case
 * defaults". brt_gd_options_init fills everything with inherit markers. */
typedef struct brt_gd_options {
  int32_t steps;
  double step_size;  /* > 0 explicit; 0 selects the auto step; < 0 inherit */
  double step_scale; /* scale of the auto step */
  double x_max;
  int32_t smoothing;          /* 0 off, 1 on, < 0 inherit */
  int32_t record_trajectory;  /* 0 off, 1 on */
} brt_gd_options;

BRT_API void brt_gd_options_init(brt_gd_options* options);

typedef struct brt_tuner_options {
  int32_t population;   /* < 0 inherit default (150) */
  int32_t generations;  /* < 0 inherit default (50) */
  int32_t neighborhood; /* <= 0 auto */
  int64_t seed;         /* < 0 inherit default (0) */
  int32_t jobs;         /* <= 0: BILEVEL_RT_THREADS, then 1 */
  double stagnation_eps; /* <= 0 disabled */
  brt_gd_options gd;
} brt_tuner_options;

BRT_API void brt_tuner_options_init(brt_tuner_options* options);

/* ---- pipeline stages (directory level) ------------------------------ */

BRT_API brt_status brt_phantom_generate(const char* spec_json_path,
                                        const char* out_dir);

BRT_API brt_status brt_optimize_dir(const char* case_dir,
                                    const char* phi_json_path, /* or NULL */
                                    const brt_gd_options* options,
                                    const char* out_dir);

BRT_API brt_status brt_tune_dir(const char* case_dir,
                                const brt_tuner_options* options,
                                const char* out_dir);

BRT_API brt_status brt_reduce_dir(const char* archive_dir, int32_t k,
                                  const char* out_dir);

BRT_API brt_status brt_report_dir(const char* plan_or_front_dir,
                                  int32_t z_index);

/* ---- case handles ---------------------------------------------------- */

BRT_API brt_status brt_case_open(const char* case_dir, brt_case** out_case);
BRT_API void brt_case_close(brt_case* kase);

BRT_API int32_t brt_case_voxel_count(const brt_case* kase);
BRT_API int32_t brt_case_beamlet_count(const brt_case* kase);
BRT_API int32_t brt_case_structure_count(const brt_case* kase);
BRT_API const char* brt_case_structure_id(const brt_case* kase,
                                          int32_t index);
BRT_API int32_t brt_case_objective_count(const brt_case* kase);

/* ---- plans ------------------------------------------------------------ */

BRT_API brt_status brt_optimize_run(const brt_case* kase,
                                    const char* phi_json_path, /* or NULL */
                                    const brt_gd_options* options,
                                    brt_plan** out_plan);
BRT_API void brt_plan_close(brt_plan* plan);

BRT_API double brt_plan_log_objective(const brt_plan* plan);
BRT_API int32_t brt_plan_fluence_size(const brt_plan* plan);
BRT_API brt_status brt_plan_fluence(const brt_plan* plan, double* buffer,
                                    int32_t length);
BRT_API int32_t brt_plan_objective_count(const brt_plan* plan);
BRT_API brt_status brt_plan_objectives(const brt_plan* plan, double* buffer,
                                       int32_t length);
BRT_API brt_status brt_plan_save(const brt_plan* plan, const char* out_dir);

/* ---- archives ---------------------------------------------------------- */

BRT_API brt_status brt_tune_run(const brt_case* kase,
                                const brt_tuner_options* options,
                                brt_archive** out_archive);
BRT_API brt_status brt_archive_open(const char* archive_dir,
                                    brt_archive** out_archive);
BRT_API void brt_archive_close(brt_archive* archive);

BRT_API int32_t brt_archive_size(const brt_archive* archive);
BRT_API brt_status brt_archive_objectives(const brt_archive* archive,
                                          int32_t index, double* buffer,
                                          int32_t length);

/* ---- reduced fronts ---------------------------------------------------- */

BRT_API brt_status brt_reduce_run(const brt_archive* archive, int32_t k,
                                  brt_front** out_front);
BRT_API void brt_front_close(brt_front* front);

BRT_API int32_t brt_front_size(const brt_front* front);
BRT_API int32_t brt_front_archive_index(const brt_front* front,
                                        int32_t position);

#ifdef __cplusplus
}
#endif

#endif /* BILEVELRT_H */
