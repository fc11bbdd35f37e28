#ifndef HDD_HDD_H
#define HDD_HDD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HDD_API __declspec(dllexport)
#else
#define HDD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hdd_status {
  HDD_OK = 0,
  HDD_ERR_INPUT = 1,
  HDD_ERR_CONFIG = 2,
  HDD_ERR_NUMERIC = 3,
  HDD_ERR_CAPACITY = 4,
  HDD_ERR_IO = 5,
  HDD_ERR_INTERNAL = 6
} hdd_status;

typedef enum hdd_loss { HDD_LOSS_MSE = 0, HDD_LOSS_CROSS_ENTROPY = 1 } hdd_loss;

typedef enum hdd_hessian_part {
  HDD_PART_LOSS = 0,
  HDD_PART_OUTER = 1,
  HDD_PART_FUNC = 2
} hdd_hessian_part;

typedef enum hdd_dist { HDD_DIST_GAUSSIAN = 0, HDD_DIST_RADEMACHER = 1, HDD_DIST_UNIFORM = 2 } hdd_dist;

typedef struct hdd_dataset hdd_dataset;
typedef struct hdd_model hdd_model;

/* Message of the last failed call on this thread; empty after a success. */
HDD_API const char* hdd_last_error(void);
HDD_API const char* hdd_version(void);

/* ---- datasets ---- */

/* Gaussian-cluster classification data. input_scale <= 0 selects 1/sqrt(d). */
HDD_API hdd_status hdd_dataset_classification(int64_t n, int64_t d, int64_t k, double label_noise,
                                              uint64_t seed, uint64_t stream, double mean_scale,
                                              double input_scale, hdd_dataset** out);
/* task: "classification" or "regression". */
HDD_API hdd_status hdd_dataset_load_csv(const char* path, int64_t d, const char* task, int64_t k,
                                        hdd_dataset** out);
HDD_API int64_t hdd_dataset_size(const hdd_dataset* data);
HDD_API int64_t hdd_dataset_dim(const hdd_dataset* data);
HDD_API void hdd_dataset_free(hdd_dataset* data);

/* ---- models ---- */

typedef struct hdd_train_options {
  int64_t epochs;
  double lr0;
  double decay;
  int64_t batch_size;
  uint64_t seed;         /* initialization */
  uint64_t shuffle_seed; /* epoch order */
} hdd_train_options;

HDD_API hdd_train_options hdd_train_defaults(void);

/* One-hidden-layer-or-deeper ReLU network with biases, trained by SGD. */
HDD_API hdd_status hdd_model_train(const hdd_dataset* data, const int64_t* hidden, size_t n_hidden,
                                   hdd_loss loss, const hdd_train_options* opts, hdd_model** out);
HDD_API int64_t hdd_model_param_count(const hdd_model* model);
/* "converged", "interpolated" or "diverged_nan". */
HDD_API const char* hdd_model_status(const hdd_model* model);
HDD_API double hdd_model_train_loss(const hdd_model* model);
HDD_API void hdd_model_free(hdd_model* model);

/* ---- Hessian ---- */

typedef struct hdd_spectrum {
  int64_t dim;
  int64_t rank;
  double zero_tol;
  double lambda_max;
  double lambda_min_nonzero; /* valid when has_lambda_r */
  int has_lambda_r;
  double trace;
  double inverse_trace;
} hdd_spectrum;

HDD_API hdd_status hdd_hessian_spectrum(const hdd_model* model, const hdd_dataset* data, hdd_loss loss,
                                        hdd_hessian_part part, double zero_tol_rel, hdd_spectrum* out);
/* Binary dump: "HDD1", u32 dim, u32 8, u32 0, then dim*dim little-endian f64 row-major. */
HDD_API hdd_status hdd_hessian_dump(const hdd_model* model, const hdd_dataset* data, hdd_loss loss,
                                    hdd_hessian_part part, const char* path);

/* ---- leave-one-out on a linear design ---- */

typedef struct hdd_loo_result {
  double loo1;
  double loo2;
  double exact_ls; /* NaN when lambda > 0 */
  double train_mse;
} hdd_loo_result;

/* design is n x q row-major. exact != 0 selects the downdated influence
 * h = A/(1-A); otherwise h = A. leverages/residuals (length n) may be NULL. */
HDD_API hdd_status hdd_loo_linear(const double* design, int64_t n, int64_t q, const double* y,
                                  double lambda, int exact, double* leverages, double* residuals,
                                  hdd_loo_result* out);
HDD_API hdd_status hdd_loo_brute_force(const double* design, int64_t n, int64_t q, const double* y,
                                       double lambda, double* out);

/* ---- random matrices ---- */

typedef struct hdd_edge_result {
  double gamma;
  double lambda_min_mean;
  double lambda_min_sd;
  double lambda_max_mean;
  double lambda_max_sd;
  double c;
  double predicted_min;
  double predicted_max;
} hdd_edge_result;

/* c <= 0 fits the constant from the data. */
HDD_API hdd_status hdd_rmt_edge(hdd_dist dist, int64_t m, int64_t n, int64_t trials, uint64_t seed,
                                double c, hdd_edge_result* out);

/* ---- experiments (JSON configuration documents) ---- */

/* Called once per record, in config order, with the record as JSON text. */
typedef void (*hdd_record_fn)(const char* record_json, void* user);

/* workers <= 0 and has_seed == 0 keep the config's values. Writes
 * <out_dir>/config.json and <out_dir>/records.jsonl. */
HDD_API hdd_status hdd_sweep_run(const char* config_json, const char* out_dir, int64_t workers,
                                 int has_seed, uint64_t seed, hdd_record_fn on_record, void* user);
/* Writes <out_dir>/redundancy.jsonl and <out_dir>/redundancy_peaks.csv. */
HDD_API hdd_status hdd_redundancy_run(const char* config_json, const char* out_dir, int has_seed,
                                      uint64_t seed, hdd_record_fn on_record, void* user);
/* Linear-design leave-one-out: <out_dir>/loo_samples.csv (per-sample
 * leverage) and <out_dir>/loo_summary.json. */
HDD_API hdd_status hdd_loo_run(const char* config_json, const char* out_dir, int has_seed,
                               uint64_t seed);
/* Edge-law table over a gamma grid: <out_dir>/rmt.csv. */
HDD_API hdd_status hdd_rmt_run(const char* config_json, const char* out_dir, int has_seed,
                               uint64_t seed);
/* Trains one network and dumps Hessian parts: <out_dir>/hessian_<part>.bin
 * plus <out_dir>/hessian.json. */
HDD_API hdd_status hdd_hessian_run(const char* config_json, const char* out_dir, int has_seed,
                                   uint64_t seed);
/* kind: "csv", "svg" or "both". */
HDD_API hdd_status hdd_report(const char* records_path, const char* out_dir, const char* kind,
                              int log_scale, int smooth);

/* Resolved sweep configuration (defaults filled in) as JSON text; the buffer
 * stays valid until the next call on this thread. */
HDD_API hdd_status hdd_sweep_config_resolve(const char* config_json, const char** out);

#ifdef __cplusplus
}
#endif

#endif
