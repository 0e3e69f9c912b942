/* arq: regression with stationary AR(p) errors, fitted by conditional ML
 * (q = 1) or by maximum Lq-likelihood (0 < q < 1) with data-driven q.
 * C ABI: opaque handles, integer status codes, caller-owned buffers. */
#ifndef ARQ_H
#define ARQ_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum arq_status {
    ARQ_OK = 0,
    ARQ_NONCONVERGENCE = 2,
    ARQ_INVALID_INPUT = 3,
    ARQ_SINGULAR = 4,
    ARQ_DEGENERATE_WEIGHTS = 5,
    ARQ_NO_VALID_Q = 6,
    ARQ_INFERENCE_UNAVAILABLE = 7,
    ARQ_INTERNAL = 8
} arq_status;

typedef struct arq_dataset arq_dataset;
typedef struct arq_fit arq_fit;
typedef struct arq_qsearch arq_qsearch;

typedef struct arq_control {
    double epsilon;  /* per-block stopping tolerance, default 1e-8 */
    int max_iter;    /* default 500 */
    double level;    /* confidence level, default 0.95 */
} arq_control;

void arq_control_defaults(arq_control *c);

const char *arq_version(void);
const char *arq_status_message(arq_status s);
/* Detail text of the most recent failure on this thread. */
const char *arq_last_error(void);

/* x is row-major n x m. Rows are time order, t = 1..n. */
arq_status arq_dataset_create(const double *y, const double *x, int n, int m,
                              arq_dataset **out);
/* Delimited text with a header row. covariates: delimiter-free column names
 * joined by commas. intercept != 0 prepends a constant-1 column. */
arq_status arq_dataset_from_csv(const char *path, const char *response,
                                const char *covariates, int intercept,
                                char delimiter, arq_dataset **out);
int arq_dataset_n(const arq_dataset *d);
int arq_dataset_m(const arq_dataset *d);
/* FNV-1a 64 digest of the source file bytes ("fnv1a64:..."), or "" when the
 * dataset was built from arrays. */
const char *arq_dataset_digest(const arq_dataset *d);
void arq_dataset_free(arq_dataset *d);

/* q = 1 is the classical conditional-ML fit; 0 < q < 1 downweights
 * low-density observations. Non-convergence is reported via the handle
 * (see arq_fit_converged), not as a status. */
arq_status arq_fit_run(const arq_dataset *d, int ar_order, double q,
                       const arq_control *c, arq_fit **out);

int arq_fit_m(const arq_fit *f);
int arq_fit_p(const arq_fit *f);
int arq_fit_nobs(const arq_fit *f); /* conditional sample size n - p */
int arq_fit_converged(const arq_fit *f);
int arq_fit_iterations(const arq_fit *f);
int arq_fit_stationary(const arq_fit *f);
int arq_fit_degenerate(const arq_fit *f);
double arq_fit_q(const arq_fit *f);
double arq_fit_sigma2_raw(const arq_fit *f);
double arq_fit_sigma2_corrected(const arq_fit *f);
double arq_fit_loglik(const arq_fit *f);
double arq_fit_lq_value(const arq_fit *f);
arq_status arq_fit_beta(const arq_fit *f, double *buf);    /* m doubles */
arq_status arq_fit_phi(const arq_fit *f, double *buf);     /* p doubles */
arq_status arq_fit_weights(const arq_fit *f, double *buf); /* n - p doubles */

/* Sandwich standard errors and symmetric z-intervals. Buffers hold
 * m + p + 1 doubles ordered (beta, phi, sigma); the last entry is on the
 * sigma (not sigma^2) scale via the delta method. */
arq_status arq_fit_inference(const arq_fit *f, const arq_dataset *d,
                             double level, double *se, double *ci_lo,
                             double *ci_hi);
/* Robust AIC of the fit (mean negative Lq-likelihood + trace penalty). */
arq_status arq_fit_raic(const arq_fit *f, const arq_dataset *d, double *out);
void arq_fit_free(arq_fit *f);

/* Minimizes the robust AIC over a descending, warm-started q grid.
 * grid == NULL uses 0.30 .. 1.00 step 0.01. */
arq_status arq_select_q(const arq_dataset *d, int ar_order,
                        const double *grid, int grid_len,
                        const arq_control *c, arq_qsearch **out);
double arq_qsearch_qstar(const arq_qsearch *s);
int arq_qsearch_curve_size(const arq_qsearch *s);
/* status: 0 ok, 1 non-converged, 2 singular penalty matrix, 3 degenerate
 * fit. raic is meaningful only for status 0. */
arq_status arq_qsearch_curve_point(const arq_qsearch *s, int i, double *q,
                                   double *raic, int *status);
/* Fresh handle for the fit at q*; caller frees it. */
arq_status arq_qsearch_take_fit(const arq_qsearch *s, arq_fit **out);
void arq_qsearch_free(arq_qsearch *s);

/* Serialized reports. config_echo_json may be NULL; when given it is
 * embedded verbatim in the provenance block. level sets the confidence
 * level of the attached intervals. Strings are released with
 * arq_string_free. */
arq_status arq_fit_report_json(const arq_fit *f, const arq_dataset *d,
                               double level, const char *config_echo_json,
                               char **out);
arq_status arq_qsearch_report_json(const arq_qsearch *s, const arq_dataset *d,
                                   double level, const char *config_echo_json,
                                   char **out);
/* Two-column q <tab> raic text of the valid curve points. */
arq_status arq_qsearch_curve_tsv(const arq_qsearch *s, char **out);

/* Monte Carlo study driven by a JSON config (see bundled configs/).
 * Emits the aggregate report (JSON), a per-parameter summary table
 * (Estimates, Bias, RMSE, SE, CIL, CIU) and a per-replication estimates
 * table, both tab-delimited. Any of the three outputs may be NULL. */
arq_status arq_simulate_json(const char *config_json, int jobs,
                             char **report_json, char **summary_tsv,
                             char **reps_tsv);
void arq_string_free(char *s);

#ifdef __cplusplus
}
#endif

#endif /* ARQ_H */
