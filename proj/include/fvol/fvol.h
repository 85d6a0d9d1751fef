#ifndef FVOL_FVOL_H
#define FVOL_FVOL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FVOL_BUILDING_LIBRARY)
#    define FVOL_API __declspec(dllexport)
#  else
#    define FVOL_API __declspec(dllimport)
#  endif
#else
#  define FVOL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fvol_status {
  FVOL_OK = 0,
  FVOL_ERR_INVALID_ARGUMENT = 1,
  FVOL_ERR_MISMATCHED_LENGTH = 2,
  FVOL_ERR_NON_UNIFORM_GRID = 3,
  FVOL_ERR_GRID_TOO_SHORT = 4,
  FVOL_ERR_NON_POSITIVE_PRICE = 5,
  FVOL_ERR_TOO_SHORT = 6,
  FVOL_ERR_OUT_OF_SUPPORT = 7,
  FVOL_ERR_MISMATCHED_GRID = 8,
  FVOL_ERR_EMPTY_DATASET = 9,
  FVOL_ERR_K_TOO_LARGE = 10,
  FVOL_ERR_NO_NEIGHBORS = 11,
  FVOL_ERR_COMPLETE_MODE_ON_INCOMPLETE_DATA = 12,
  FVOL_ERR_MISSING_FITTED_VALUE = 13,
  FVOL_ERR_DEGENERATE_VARIANCE = 14,
  FVOL_ERR_EMPTY_BALL = 15,
  FVOL_ERR_NON_POSITIVE_PLUGIN = 16,
  FVOL_ERR_ALL_DISTANCES_ZERO = 17,
  FVOL_ERR_NO_FEASIBLE_CANDIDATE = 18,
  FVOL_ERR_ZERO_DENOMINATOR = 19,
  FVOL_ERR_EMPTY_RECORDS = 20,
  FVOL_ERR_EMPTY_SERIES = 21,
  FVOL_ERR_SCHEMA = 22,
  FVOL_ERR_NO_OVERLAPPING_DATES = 23,
  FVOL_ERR_IO = 24,
  FVOL_ERR_PCA_NOT_FITTED = 25,
  FVOL_ERR_INTERNAL = 99
} fvol_status;

typedef enum fvol_mode { FVOL_MODE_COMPLETE = 0, FVOL_MODE_SIMPLIFIED = 1, FVOL_MODE_IMPUTED = 2 } fvol_mode;

typedef struct fvol_config fvol_config;
typedef struct fvol_dataset fvol_dataset;
typedef struct fvol_estimator fvol_estimator;
typedef struct fvol_sim_report fvol_sim_report;
typedef struct fvol_finance fvol_finance;
typedef struct fvol_pipeline_report fvol_pipeline_report;

typedef struct fvol_estimate {
  double u_hat;
  double ci_low;
  double ci_high;
  double omega_hat;
  double pi_hat;
  double m1_hat;
  double m2_hat;
  double f_hat;
  double h2;
} fvol_estimate;

typedef struct fvol_pipeline_summary {
  size_t days;
  double se_q25;
  double se_q50;
  double se_q75;
  double mse;
  double coverage;
  double mean_ci_length;
  double missing_rate;
  size_t ci_undefined;
} fvol_pipeline_summary;

/* Message of the last failed call on this thread ("" when none). */
FVOL_API const char* fvol_last_error(void);
FVOL_API const char* fvol_status_name(fvol_status status);
FVOL_API const char* fvol_version(void);

/* Configuration; keys and values as in the config file format. */
FVOL_API fvol_status fvol_config_new(fvol_config** out);
FVOL_API fvol_status fvol_config_set(fvol_config* cfg, const char* key, const char* value);
FVOL_API fvol_status fvol_config_load(fvol_config* cfg, const char* path);
FVOL_API void fvol_config_free(fvol_config* cfg);

/* n curves of p values each, row-major; delta[t] == 0 marks y[t] missing. */
FVOL_API fvol_status fvol_dataset_new(const double* grid, size_t p, const double* curves, size_t n, const double* y,
                                      const int* delta, fvol_dataset** out);
FVOL_API fvol_status fvol_dataset_load_csv(const char* curves_path, const char* responses_path, fvol_dataset** out);
FVOL_API fvol_status fvol_dataset_shape(const fvol_dataset* data, size_t* n, size_t* p, size_t* observed);
FVOL_API void fvol_dataset_free(fvol_dataset* data);

/* Fits every estimator; bandwidths marked auto are cross-validated. */
FVOL_API fvol_status fvol_estimator_new(const fvol_dataset* data, const fvol_config* cfg, fvol_estimator** out);
/* h1..h4 used by the mode. */
FVOL_API fvol_status fvol_estimator_bandwidths(const fvol_estimator* est, fvol_mode mode, double out[4]);
FVOL_API fvol_status fvol_estimator_regression(const fvol_estimator* est, const double* curve, size_t p,
                                               fvol_mode mode, double* out);
FVOL_API fvol_status fvol_estimator_estimate(const fvol_estimator* est, const double* curve, size_t p, fvol_mode mode,
                                             double level, fvol_estimate* out);
/* Estimates at every curve of eval_curves_path (the sample curves when NULL),
   written as CSV. */
FVOL_API fvol_status fvol_estimator_write_csv(const fvol_estimator* est, const char* eval_curves_path,
                                              fvol_mode mode, double level, const char* out_path);
FVOL_API void fvol_estimator_free(fvol_estimator* est);

FVOL_API fvol_status fvol_simulate(const fvol_config* cfg, fvol_sim_report** out);
FVOL_API fvol_status fvol_sim_report_mise(const fvol_sim_report* rep, fvol_mode mode, double* mise, double* q1,
                                          double* median, double* q3);
FVOL_API fvol_status fvol_sim_report_coverage(const fvol_sim_report* rep, fvol_mode mode, double* coverage,
                                              double* mean_length, double* coverage_efficiency);
FVOL_API fvol_status fvol_sim_report_efficiency(const fvol_sim_report* rep, double* out);
FVOL_API fvol_status fvol_sim_report_write_csv(const fvol_sim_report* rep, const char* path);
FVOL_API void fvol_sim_report_free(fvol_sim_report* rep);

/* rv_hourly_path may be NULL. */
FVOL_API fvol_status fvol_finance_ingest(const char* hourly_path, const char* daily_path, const char* rv_hourly_path,
                                         fvol_finance** out);
FVOL_API fvol_status fvol_finance_days(const fvol_finance* fin, size_t* kept, size_t* dropped);
FVOL_API fvol_status fvol_finance_realized_vol(const fvol_finance* fin, double* out, size_t len);
/* Date and reason of the i-th dropped input day; strings live as long as fin. */
FVOL_API fvol_status fvol_finance_dropped(const fvol_finance* fin, size_t i, const char** date, const char** reason);
/* Writes curves (id = date) and responses; MAR-masks responses when zeta > 0. */
FVOL_API fvol_status fvol_finance_write_dataset(const fvol_finance* fin, const char* curves_path,
                                                const char* responses_path, double zeta, uint64_t seed);
FVOL_API fvol_status fvol_finance_write_rv(const fvol_finance* fin, const char* path);
FVOL_API void fvol_finance_free(fvol_finance* fin);

/* Daily realized volatility of an hourly `timestamp,price` file. */
FVOL_API fvol_status fvol_rv_from_hourly_csv(const char* hourly_path, const char* out_path);
/* Synthetic FX hourly, commodity daily and commodity hourly price files. */
FVOL_API fvol_status fvol_synthesize_finance(size_t days, double gas_sigma, double fx_hourly_sd, uint64_t seed,
                                             const char* fx_hourly_path, const char* daily_path,
                                             const char* gas_hourly_path);

/* Injects MAR responses with strength zeta (no injection when zeta == 0; the
   configured finance.zeta when zeta < 0), then runs the configured mode. */
FVOL_API fvol_status fvol_pipeline_run(const fvol_finance* fin, const fvol_config* cfg, double zeta,
                                       fvol_pipeline_report** out);
FVOL_API fvol_status fvol_pipeline_summary_get(const fvol_pipeline_report* rep, fvol_pipeline_summary* out);
FVOL_API fvol_status fvol_pipeline_report_write_csv(const fvol_pipeline_report* rep, const char* path);
FVOL_API void fvol_pipeline_report_free(fvol_pipeline_report* rep);

FVOL_API fvol_status fvol_realized_vol(const double* returns, size_t n, double* out);
FVOL_API fvol_status fvol_efficiency(double mise_simplified, double mise_imputed, double* out);

#ifdef __cplusplus
}
#endif

#endif
