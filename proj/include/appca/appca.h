/*
 * C interface to the anchor projected PCA library.
 *
 * All objects are opaque handles created by a *_read / *_parse / *_create /
 * *_generate / *_run call and released with the matching *_free function.
 * Every fallible call returns an appca_status; on failure a description is
 * available from appca_last_error() on the same thread until the next call.
 * Strings returned through char** out-parameters are heap allocated and must
 * be released with appca_string_free().
 *
 * Indices passed through this interface are 0-based; group labels inside plan
 * JSON documents are 1-based.
 */
#ifndef APPCA_APPCA_H
#define APPCA_APPCA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(APPCA_BUILDING_LIBRARY)
#    define APPCA_API __declspec(dllexport)
#  else
#    define APPCA_API __declspec(dllimport)
#  endif
#else
#  define APPCA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum appca_status {
  APPCA_OK = 0,
  APPCA_ERR_DOMAIN = 1,
  APPCA_ERR_DATA = 2,
  APPCA_ERR_FEASIBILITY = 3,
  APPCA_ERR_CONDITIONING = 4,
  APPCA_ERR_CONFIG = 5,
  APPCA_ERR_IO = 6,
  APPCA_ERR_NUMERICAL = 7,
  APPCA_ERR_INVALID_ARGUMENT = 8,
  APPCA_ERR_INTERNAL = 9
} appca_status;

typedef enum appca_method {
  APPCA_METHOD_APPCA = 0,
  APPCA_METHOD_APPCA_CROSSFIT = 1,
  APPCA_METHOD_CHAIN = 2,
  APPCA_METHOD_SHARED_PCA = 3,
  APPCA_METHOD_TWO_STEP = 4,
  APPCA_METHOD_ORACLE = 5
} appca_method;

typedef struct appca_layout appca_layout;       /* groups, blocks, indicator */
typedef struct appca_matrix appca_matrix;       /* dense matrix, NaN allowed */
typedef struct appca_masked appca_masked;       /* matrix bound to a valid layout */
typedef struct appca_plan appca_plan;           /* chain of super-groups */
typedef struct appca_embedding appca_embedding; /* fitted subject representation */
typedef struct appca_sim appca_sim;             /* simulated instance */
typedef struct appca_sweep appca_sweep;         /* sweep results */

APPCA_API const char* appca_version(void);
APPCA_API const char* appca_last_error(void);
APPCA_API const char* appca_status_name(appca_status status);
APPCA_API void appca_string_free(char* s);

/* Accepts "appca", "appca-crossfit", "chain", "shared-pca", "two-step",
 * "oracle" (underscores also accepted). */
APPCA_API appca_status appca_parse_method(const char* name, appca_method* out);
APPCA_API const char* appca_method_name(appca_method method);

/* ---- layouts ----------------------------------------------------------- */

APPCA_API appca_status appca_layout_read(const char* path, appca_layout** out);
APPCA_API appca_status appca_layout_parse(const char* json, appca_layout** out);
APPCA_API appca_status appca_layout_write(const appca_layout* layout, const char* path);
/* JSON array of {"code","message"}; *violations receives its length. */
APPCA_API appca_status appca_layout_validate(const appca_layout* layout, char** diagnostics_json,
                                             size_t* violations);
/* {"n","p","groups","blocks","observed_features":[...],"shared_features"} */
APPCA_API appca_status appca_layout_describe(const appca_layout* layout, char** json);
APPCA_API void appca_layout_free(appca_layout* layout);

/* ---- dense matrices ---------------------------------------------------- */

APPCA_API appca_status appca_matrix_read_csv(const char* path, appca_matrix** out);
APPCA_API appca_status appca_matrix_from_rows(size_t rows, size_t cols, const double* row_major,
                                              appca_matrix** out);
APPCA_API appca_status appca_matrix_write_csv(const appca_matrix* m, const char* path);
APPCA_API size_t appca_matrix_rows(const appca_matrix* m);
APPCA_API size_t appca_matrix_cols(const appca_matrix* m);
APPCA_API appca_status appca_matrix_copy_rows(const appca_matrix* m, double* row_major_out);
APPCA_API void appca_matrix_free(appca_matrix* m);

/* Binds values to a layout; masked cells are replaced by NaN, and non-finite
 * observed cells are rejected. */
APPCA_API appca_status appca_masked_create(const appca_matrix* values, const appca_layout* layout,
                                           appca_masked** out);
APPCA_API void appca_masked_free(appca_masked* x);

/* ---- chain plans ------------------------------------------------------- */

APPCA_API appca_status appca_plan_read(const char* path, appca_plan** out);
APPCA_API appca_status appca_plan_parse(const char* json, appca_plan** out);
/* APPCA_ERR_FEASIBILITY when no valid chain exists. */
APPCA_API appca_status appca_plan_discover(const appca_layout* layout, appca_plan** out);
APPCA_API appca_status appca_plan_validate(const appca_layout* layout, const appca_plan* plan,
                                           char** diagnostics_json, size_t* violations);
APPCA_API appca_status appca_plan_to_json(const appca_plan* plan, char** json);
APPCA_API void appca_plan_free(appca_plan* plan);

/* ---- fitting ----------------------------------------------------------- */

typedef struct appca_fit_options {
  const appca_plan* plan;  /* chain: NULL discovers a plan */
  size_t reference_group;  /* two-step: 0-based reference group */
  uint64_t fold_seed;      /* cross-fit: seed of the anchor split */
} appca_fit_options;

APPCA_API void appca_fit_options_init(appca_fit_options* options);
/* APPCA_METHOD_ORACLE is rejected here; use appca_fit_oracle. */
APPCA_API appca_status appca_fit(const appca_masked* x, appca_method method, size_t rank,
                                 const appca_fit_options* options, appca_embedding** out);
APPCA_API appca_status appca_fit_oracle(const appca_matrix* x_full, size_t rank,
                                        appca_embedding** out);
APPCA_API size_t appca_embedding_rank(const appca_embedding* e);
/* Rows in original subject order. */
APPCA_API appca_status appca_embedding_matrix(const appca_embedding* e, appca_matrix** out);
APPCA_API appca_status appca_embedding_write_csv(const appca_embedding* e, const char* path);
APPCA_API void appca_embedding_free(appca_embedding* e);

/* ---- metrics ----------------------------------------------------------- */

/* report_json (nullable) receives {"raw_error","normalized","h_star",
 * "projector_form"}. */
APPCA_API appca_status appca_alignment_error(const appca_matrix* theta_hat,
                                             const appca_matrix* theta, double* normalized,
                                             char** report_json);
APPCA_API appca_status appca_subspace_distance(const appca_matrix* u1, const appca_matrix* u2,
                                               double* out);
APPCA_API appca_status appca_rank_select_ic(const appca_matrix* x, size_t r_max, size_t* out);
/* Largest IC choice over the groups' fully observed submatrices. */
APPCA_API appca_status appca_rank_select_blockwise(const appca_masked* x, size_t r_max,
                                                   size_t* out);

/* ---- simulation -------------------------------------------------------- */

/* config_json: {"scenario":"2x3"|"3x3"|"custom","n","p","r","alpha","beta",
 * "seed","noise_sd"}; missing keys take their defaults. */
APPCA_API appca_status appca_sim_generate(const char* config_json, appca_sim** out);
/* Writes X.csv, X_full.csv, theta_true.csv and layout.json into dir. */
APPCA_API appca_status appca_sim_write(const appca_sim* sim, const char* dir);
APPCA_API appca_status appca_sim_masked(const appca_sim* sim, appca_masked** out);
APPCA_API appca_status appca_sim_full(const appca_sim* sim, appca_matrix** out);
APPCA_API appca_status appca_sim_theta(const appca_sim* sim, appca_matrix** out);
APPCA_API appca_status appca_sim_layout(const appca_sim* sim, appca_layout** out);
APPCA_API void appca_sim_free(appca_sim* sim);

/* ---- sweeps ------------------------------------------------------------ */

/* grid_json: {"configs":[...],"methods":[...],"reps","base_seed","workers"}.
 * workers_override > 0 replaces the grid's worker count. */
APPCA_API appca_status appca_sweep_run(const char* grid_json, int workers_override,
                                       appca_sweep** out);
/* Writes results.jsonl, summary.csv, slopes.csv and timings.csv into dir. */
APPCA_API appca_status appca_sweep_write(const appca_sweep* sweep, const char* dir);
APPCA_API size_t appca_sweep_succeeded(const appca_sweep* sweep);
APPCA_API size_t appca_sweep_failed(const appca_sweep* sweep);
APPCA_API void appca_sweep_free(appca_sweep* sweep);

#ifdef __cplusplus
}
#endif

#endif /* APPCA_APPCA_H */
