#ifndef MMV_MMV_H
#define MMV_MMV_H

/*
 * C interface to libmmv: maximum mean-variance dimension reduction for
 * classification, the downstream classifiers and the cross-validation harness.
 *
 * Every fallible call returns an mmv_status. On failure the thread-local
 * message returned by mmv_last_error() describes the problem. Strings handed
 * out through char** parameters are owned by the caller and must be released
 * with mmv_string_free().
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(MMV_BUILDING_LIBRARY)
#    define MMV_API __declspec(dllexport)
#  else
#    define MMV_API __declspec(dllimport)
#  endif
#else
#  define MMV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mmv_status {
  MMV_OK = 0,
  MMV_ERR_INVALID_ARGUMENT = 1,
  MMV_ERR_NON_FINITE_VALUE,
  MMV_ERR_SINGLE_CLASS,
  MMV_ERR_EMPTY_INPUT,
  MMV_ERR_EMPTY_CLASS,
  MMV_ERR_EMPTY_SAMPLE,
  MMV_ERR_NON_POSITIVE_BANDWIDTH,
  MMV_ERR_DEGENERATE_SCORES,
  MMV_ERR_STEP_MODE_GRADIENT,
  MMV_ERR_QUADRATURE_FAILURE,
  MMV_ERR_KEEP_OUT_OF_RANGE,
  MMV_ERR_RANK_DEFICIENT_PREV,
  MMV_ERR_INFEASIBLE_SUBSPACE,
  MMV_ERR_NOT_BINARY,
  MMV_ERR_DEGENERATE_COVARIANCE,
  MMV_ERR_K_TOO_LARGE,
  MMV_ERR_DIMENSION_MISMATCH,
  MMV_ERR_ODD_N,
  MMV_ERR_TOO_MANY_FOLDS,
  MMV_ERR_PARSE_ERROR,
  MMV_ERR_MISSING_LABEL_COLUMN,
  MMV_ERR_IO_ERROR,
  MMV_ERR_INTERNAL = 100
} mmv_status;

typedef enum mmv_cdf_mode { MMV_CDF_SMOOTHED = 0, MMV_CDF_STEP = 1 } mmv_cdf_mode;
typedef enum mmv_kernel { MMV_KERNEL_GAUSSIAN = 0, MMV_KERNEL_EPANECHNIKOV = 1 } mmv_kernel;
typedef enum mmv_format { MMV_FORMAT_CSV = 0, MMV_FORMAT_JSON = 1 } mmv_format;

typedef struct mmv_dataset mmv_dataset;
typedef struct mmv_report mmv_report;

/* Knobs shared by fit and cv. Start from mmv_options_init(). */
typedef struct mmv_options {
  size_t d;             /* directions to extract */
  size_t keep;          /* marginal screening size, 0 = no screening */
  mmv_cdf_mode cdf;
  mmv_kernel kernel;
  double bandwidth;     /* <= 0 selects the rule of thumb */
  size_t restarts;
  size_t max_iters;
  double mv_floor;
  size_t knn_k;
  size_t folds;
  int stratified;
  size_t repetitions;
  uint64_t seed;
  size_t threads;       /* 0 = MMV_THREADS or hardware concurrency */
  int identity_covariance; /* simulations: replace AR(0.5) by I */
} mmv_options;

MMV_API void mmv_options_init(mmv_options* options);

MMV_API const char* mmv_last_error(void);
MMV_API const char* mmv_status_name(mmv_status status);
MMV_API void mmv_string_free(char* text);
MMV_API const char* mmv_version(void);

/* Datasets */
MMV_API mmv_status mmv_dataset_load_csv(const char* path, const char* label_column,
                                        mmv_dataset** out);
MMV_API mmv_status mmv_dataset_simulate(const char* model, size_t n, size_t p,
                                        const mmv_options* options, mmv_dataset** out);
MMV_API mmv_status mmv_dataset_save_csv(const mmv_dataset* data, const char* path,
                                        const char* label_column);
MMV_API mmv_status mmv_dataset_shape(const mmv_dataset* data, size_t* rows, size_t* cols,
                                     size_t* classes);
MMV_API void mmv_dataset_free(mmv_dataset* data);

/* MV index of X beta against the labels; beta has length cols. */
MMV_API mmv_status mmv_mv_of_direction(const mmv_dataset* data, const double* beta, size_t length,
                                       const mmv_options* options, double* value);

/* Top `keep` columns by marginal step-mode MV, best first. Both arrays hold keep entries. */
MMV_API mmv_status mmv_screen(const mmv_dataset* data, size_t keep, size_t* indices,
                              double* mv_values);

/* Screening (options->keep) then MMV; the basis is returned as a JSON document. */
MMV_API mmv_status mmv_fit_json(const mmv_dataset* data, const mmv_options* options, char** json);

/* `methods` is a comma separated list such as "mmv+lda,lda". */
MMV_API mmv_status mmv_cv_simulation(const char* model, size_t n, size_t p, const char* methods,
                                     const mmv_options* options, mmv_report** out);
MMV_API mmv_status mmv_cv_dataset(const mmv_dataset* data, const char* methods,
                                  const mmv_options* options, mmv_report** out);

/* Checks a simulation experiment without running it and describes it as JSON. */
MMV_API mmv_status mmv_cv_plan_simulation(const char* model, size_t n, size_t p,
                                          const char* methods, const mmv_options* options,
                                          char** json);
MMV_API mmv_status mmv_cv_plan_dataset(const mmv_dataset* data, const char* methods,
                                       const mmv_options* options, char** json);

MMV_API size_t mmv_report_rows(const mmv_report* report);
/* Mean and sd are fractions in [0, 1]; method points into the report. */
MMV_API mmv_status mmv_report_row(const mmv_report* report, size_t row, const char** method,
                                  double* mean, double* sd, size_t* repetitions);
MMV_API mmv_status mmv_report_format(const mmv_report* report, mmv_format format, char** text);
MMV_API void mmv_report_free(mmv_report* report);

#ifdef __cplusplus
}
#endif

#endif
