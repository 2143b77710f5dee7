/* C interface to the npivqb quasi-Bayes NPIV library.
 *
 * Objects are opaque handles created by npq_*_create/compute/... functions and
 * released with the matching *_free. Every fallible call returns an
 * npq_status; on failure npq_last_error() gives a message for the calling
 * thread. Array outputs use (buffer, capacity, *length): *length is always
 * set to the required size, and NPQ_ERR_BUFFER_TOO_SMALL is returned when the
 * capacity is short.
 */
#ifndef NPIVQB_H
#define NPIVQB_H

#include <stddef.h>
#include <stdint.h>

#if defined(NPQ_BUILDING_LIBRARY)
#define NPQ_API __attribute__((visibility("default")))
#else
#define NPQ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum npq_status {
    NPQ_OK = 0,
    NPQ_ERR_DOMAIN = 1,
    NPQ_ERR_DATA = 2,
    NPQ_ERR_CONFIGURATION = 3,
    NPQ_ERR_DIMENSION = 4,
    NPQ_ERR_SPECTRUM_EXHAUSTED = 5,
    NPQ_ERR_UNSUPPORTED_FAMILY = 6,
    NPQ_ERR_INITIALIZATION = 7,
    NPQ_ERR_STUCK_CHAIN = 8,
    NPQ_ERR_ILL_CONDITIONED = 9,
    NPQ_ERR_ABSOLUTE_CONTINUITY = 10,
    NPQ_ERR_CSV_EMPTY = 11,
    NPQ_ERR_CSV_MISSING_HEADER = 12,
    NPQ_ERR_CSV_MALFORMED_ROW = 13,
    NPQ_ERR_CSV_OUT_OF_RANGE = 14,
    NPQ_ERR_IO = 15,
    NPQ_ERR_NUMERICAL = 16,
    NPQ_ERR_NULL_ARGUMENT = 17,
    NPQ_ERR_BUFFER_TOO_SMALL = 18,
    NPQ_ERR_INTERNAL = 99
} npq_status;

typedef enum npq_category {
    NPQ_CATEGORY_NONE = 0,
    NPQ_CATEGORY_VALIDATION = 1, /* bad input, config or data */
    NPQ_CATEGORY_NUMERICAL = 2,  /* stuck chain, ill-conditioning, non-PD matrices */
    NPQ_CATEGORY_INTERNAL = 3
} npq_category;

typedef enum npq_basis { NPQ_BASIS_COSINE = 0, NPQ_BASIS_HAAR = 1 } npq_basis;
typedef enum npq_illposedness { NPQ_MILD = 0, NPQ_SEVERE = 1 } npq_illposedness;

typedef struct npq_design npq_design;
typedef struct npq_sample npq_sample;
typedef struct npq_moments npq_moments;
typedef struct npq_fit npq_fit;

NPQ_API const char* npq_version(void);
NPQ_API const char* npq_last_error(void);
NPQ_API const char* npq_status_name(npq_status status);
NPQ_API npq_category npq_status_category(npq_status status);

/* Designs. rate is r (mild) or c (severe). */
NPQ_API npq_status npq_design_create(npq_illposedness kind, double rate, double scale, int modes, double smoothness,
                                     double rho_u, double sigma_e, npq_design** out);
/* JSON object with keys kind, r|c, scale, L, s, rho_U, sigma_e, seed. */
NPQ_API npq_status npq_design_from_json(const char* json, npq_design** out);
NPQ_API void npq_design_free(npq_design* design);
NPQ_API npq_status npq_design_density(const npq_design* design, double x, double w, double* out);
NPQ_API npq_status npq_design_true_tau(const npq_design* design, int level, double* out);
NPQ_API npq_status npq_design_true_coeffs(const npq_design* design, double* buf, size_t cap, size_t* len);
NPQ_API npq_status npq_design_spectrum(const npq_design* design, double* buf, size_t cap, size_t* len);

/* Samples. */
NPQ_API npq_status npq_sample_simulate(const npq_design* design, size_t n, uint64_t seed, npq_sample** out);
NPQ_API npq_status npq_sample_from_arrays(const double* y, const double* x, const double* w, size_t n,
                                          npq_sample** out);
NPQ_API npq_status npq_sample_load_csv(const char* path, npq_sample** out);
NPQ_API npq_status npq_sample_save_csv(const npq_sample* sample, const char* path);
NPQ_API size_t npq_sample_size(const npq_sample* sample);
/* Copies the columns; any of y, x, w may be NULL. Each must hold size() values. */
NPQ_API npq_status npq_sample_columns(const npq_sample* sample, double* y, double* x, double* w);
NPQ_API void npq_sample_free(npq_sample* sample);

/* Empirical moments at resolution level J. */
NPQ_API npq_status npq_moments_compute(const npq_sample* sample, npq_basis basis, int level, npq_moments** out);
NPQ_API void npq_moments_free(npq_moments* moments);
NPQ_API size_t npq_moments_dim(const npq_moments* moments);
NPQ_API npq_status npq_moments_tau_hat(const npq_moments* moments, double* out);
NPQ_API npq_status npq_moments_quasi_loglik(const npq_moments* moments, const double* b, size_t len, double* out);
NPQ_API npq_status npq_moments_mde(const npq_moments* moments, double* buf, size_t cap, size_t* len);

/* Fits. config_json follows the experiment-config schema; only basis, J,
 * J_cap, prior, eta, sampler and design (for automatic J and ground truth)
 * are read. */
NPQ_API npq_status npq_fit_run(const char* config_json, const npq_sample* sample, uint64_t seed, npq_fit** out);
NPQ_API void npq_fit_free(npq_fit* fit);
NPQ_API int npq_fit_level(const npq_fit* fit);
NPQ_API double npq_fit_tau_hat(const npq_fit* fit);
NPQ_API npq_status npq_fit_qb(const npq_fit* fit, double* buf, size_t cap, size_t* len);
NPQ_API npq_status npq_fit_mde(const npq_fit* fit, double* buf, size_t cap, size_t* len);
NPQ_API npq_status npq_fit_posterior_sd(const npq_fit* fit, double* buf, size_t cap, size_t* len);
/* NUL-terminated JSON report; *len excludes the terminator. */
NPQ_API npq_status npq_fit_report_json(const npq_fit* fit, char* buf, size_t cap, size_t* len);

/* Commands behind the CLI. seed may be NULL to keep the config's seed;
 * data_path (fit only) may be NULL. A one-line summary of the last
 * successful command on this thread is available from npq_last_summary(). */
typedef enum npq_command {
    NPQ_CMD_SIMULATE = 0,
    NPQ_CMD_FIT = 1,
    NPQ_CMD_RATE_STUDY = 2,
    NPQ_CMD_BVM_STUDY = 3,
    NPQ_CMD_ILLPOSEDNESS = 4
} npq_command;

NPQ_API npq_status npq_run_command(npq_command command, const char* config_path, const uint64_t* seed,
                                   const char* out_dir, const char* data_path);
NPQ_API const char* npq_last_summary(void);

#ifdef __cplusplus
}
#endif

#endif /* NPIVQB_H */
