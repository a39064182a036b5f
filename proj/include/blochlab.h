/*
 * blochlab — desk-scale spectral numerics for periodic magnetic Schrödinger
 * operators on the torus: plane-wave operator assembly, Bloch band tables,
 * complex-quasimomentum lower-bound scans, dual-space parametrix residuals,
 * and the d-bar gauge model problem.
 *
 * C API: opaque handles + status codes. Every function that can fail returns
 * a bl_status; details for the last failing call on the current thread are
 * available through bl_last_error_message().
 */
#ifndef BLOCHLAB_H
#define BLOCHLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BL_API __declspec(dllexport)
#else
#define BL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bl_status {
  BL_OK = 0,
  BL_ERR_INVALID_ARGUMENT = 1,
  BL_ERR_SHAPE = 2,
  BL_ERR_DOMAIN = 3,
  BL_ERR_BUDGET = 4,     /* mode-count budget exceeded */
  BL_ERR_CONFIG = 5,     /* configuration document rejected */
  BL_ERR_TOLERANCE = 6,  /* numerical tolerance not met */
  BL_ERR_CLASSIFICATION = 7,
  BL_ERR_RANK_DEFICIENT = 8,
  BL_ERR_INTEGRITY = 9,
  BL_ERR_IO = 10,
  BL_ERR_INTERNAL = 11
} bl_status;

BL_API const char* bl_version(void);
BL_API const char* bl_status_name(bl_status status);

/* Message describing the last failure on this thread ("" when none). */
BL_API const char* bl_last_error_message(void);

/* ---- lattices ---------------------------------------------------------- */

typedef struct bl_lattice bl_lattice;

/* Modes {m in Z^d : max|m_i| <= N}. Fails with BL_ERR_BUDGET when (2N+1)^d
 * exceeds the mode budget (BLOCHLAB_MODE_BUDGET environment variable). */
BL_API bl_status bl_lattice_create(int d, int N, bl_lattice** out);
BL_API void bl_lattice_destroy(bl_lattice* lattice);
BL_API int bl_lattice_dim(const bl_lattice* lattice);
BL_API int bl_lattice_cutoff(const bl_lattice* lattice);
BL_API int64_t bl_lattice_mode_count(const bl_lattice* lattice);

/* ---- periodic fields --------------------------------------------------- */

typedef struct bl_field bl_field;

/* Parse the field literal format (header + `m_1 ... m_d re im ...` lines). */
BL_API bl_status bl_field_parse(const bl_lattice* lattice, const char* literal, bl_field** out);

/* Built-in presets: "cos", "mathieu", "gauss-decay", "single-mode-A", "zero".
 * rank: 0 scalar, 1 vector. params_json: JSON object or NULL. */
BL_API bl_status bl_field_preset(const bl_lattice* lattice, const char* name, const char* params_json,
                                 int rank, uint64_t seed, bl_field** out);
BL_API void bl_field_destroy(bl_field* field);

/* ( sum_m (1+|m|^2)^s |u(m)|^2 )^{1/2} over all components */
BL_API bl_status bl_field_sobolev_norm(const bl_field* field, double s, double* out);

/* Serialize in the literal format; free with bl_string_free. */
BL_API bl_status bl_field_format(const bl_field* field, char** out);
BL_API void bl_string_free(char* text);

/* ---- experiment runs --------------------------------------------------- */

typedef struct bl_run bl_run;

/* Create a run from a JSON experiment configuration (strict: unknown keys are
 * rejected). The run owns a copy of the text; execution happens in
 * bl_run_execute. */
BL_API bl_status bl_run_create(const char* config_json, bl_run** out);
BL_API bl_status bl_run_create_from_file(const char* path, bl_run** out);
/* Re-run the configuration echoed in an emitted manifest (CSV outputs are
 * byte-identical to the original run). */
BL_API bl_status bl_run_create_from_manifest(const char* path, bl_run** out);
BL_API void bl_run_destroy(bl_run* run);

BL_API bl_status bl_run_set_seed(bl_run* run, uint64_t seed);
BL_API bl_status bl_run_set_output_dir(bl_run* run, const char* dir);
/* Guard: fail with BL_ERR_CONFIG when the config kind differs (CLI subcommand
 * matching). kind: "bands" | "thomas" | "cover" | "gauge" | "matrix-gauge". */
BL_API bl_status bl_run_set_expected_kind(bl_run* run, const char* kind);

BL_API bl_status bl_run_execute(bl_run* run);

/* Valid after a successful execute. */
BL_API const char* bl_run_manifest_path(const bl_run* run);
/* Newline-separated warnings collected by config parsing ("" when none). */
BL_API const char* bl_run_warnings(const bl_run* run);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BLOCHLAB_H */
