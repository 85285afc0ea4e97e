/* rkhs_kit.h - C interface of the rkhs-kit shared library.
 *
 * Conventions:
 *   - matrices are dense row-major double buffers with explicit row/col counts
 *   - every function returns a status code: 0 ok, 2 invalid input,
 *     3 numerical failure; rkhs_last_error() describes the latest failure
 *     (thread local)
 *   - objects behind opaque handles are immutable once created and must be
 *     released with their _free function
 */
#ifndef RKHS_KIT_H
#define RKHS_KIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RKHS_API __declspec(dllexport)
#else
#define RKHS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
    RKHS_OK = 0,
    RKHS_ERR_INVALID = 2,
    RKHS_ERR_NUMERICAL = 3
};

typedef struct rkhs_kernel rkhs_kernel;
typedef struct rkhs_model rkhs_model;
typedef struct rkhs_generator rkhs_generator;

RKHS_API const char* rkhs_version(void);
RKHS_API const char* rkhs_last_error(void);

/* ---- kernel specs ------------------------------------------------------ */

/* spec_json: {"kernel": "...", "params": [...], "maps": ["...", ...]} or the
 * shorthand "matern|unit-cube,erf-inv,mean-distance". NULL or "" gives the
 * default spec. */
RKHS_API int rkhs_kernel_create(const char* spec_json, rkhs_kernel** out);
RKHS_API int rkhs_kernel_fit_maps(rkhs_kernel* k, const double* X, int n, int d);
RKHS_API void rkhs_kernel_free(rkhs_kernel* k);

RKHS_API int rkhs_eval(const rkhs_kernel* k, const double* x, const double* y, int d,
                       double* out);
RKHS_API int rkhs_gram(const rkhs_kernel* k, const double* X, int nx, const double* Y, int ny,
                       int d, double* out /* nx*ny */);
RKHS_API int rkhs_distance_matrix(const rkhs_kernel* k, const double* X, int nx, const double* Y,
                                  int ny, int d, double* out /* nx*ny */);
RKHS_API int rkhs_mmd(const rkhs_kernel* k, const double* X, int nx, const double* Y, int ny,
                      int d, double* out);

/* ---- regression -------------------------------------------------------- */

/* regularizer: 0 identity, 1 laplacian */
RKHS_API int rkhs_fit(const rkhs_kernel* k, const double* X, int n, int d, const double* fX,
                      int df, double epsilon, int regularizer, rkhs_model** out);
RKHS_API int rkhs_predict(const rkhs_model* m, const double* Z, int nz, int d,
                          double* out /* nz*df */);
RKHS_API int rkhs_model_dims(const rkhs_model* m, int* d_in, int* d_out, int* n_basis);
/* gradient of the fitted map, flat (nz*d) x df, row index z*d + dim */
RKHS_API int rkhs_gradient(const rkhs_model* m, const double* Z, int nz, int d, double* out);
RKHS_API int rkhs_model_to_json(const rkhs_model* m, char** out_text /* rkhs_free_text */);
RKHS_API int rkhs_model_from_json(const char* text, rkhs_model** out);
RKHS_API void rkhs_model_free(rkhs_model* m);
RKHS_API void rkhs_free_text(char* text);

/* ---- clustering -------------------------------------------------------- */

/* method: "greedy", "refine", "sharp", "balanced", "kmeans-inertia".
 * metric: 0 euclidean, 1 kernel discrepancy. centroids_out: k*d,
 * assign_out: n ints. */
RKHS_API int rkhs_cluster(const rkhs_kernel* kern, const double* X, int n, int d, int k,
                          const char* method, int metric, uint64_t seed, double* centroids_out,
                          int* assign_out, double* mmd_out, double* inertia_out);

/* ---- transport --------------------------------------------------------- */

RKHS_API int rkhs_lsap(const double* cost, int m, int n, int* sigma_out /* m */,
                       double* cost_out);
RKHS_API int rkhs_sinkhorn(const double* cost, int n, double epsilon, double tol, int max_iter,
                           double* plan_out /* n*n */, double* residual_out, int* iters_out);
RKHS_API int rkhs_martingale_ot(const rkhs_kernel* k, const double* X, const double* Y, int n,
                                int d, double tol, int max_iter, int project_nonneg,
                                double* plan_out /* n*n */, double* residual_out,
                                double* min_entry_out);
RKHS_API int rkhs_gromov_monge(const double* DX, const double* DY, int n, int* sigma_out,
                               double* objective_out);
RKHS_API int rkhs_polar_potential(const rkhs_kernel* k, const double* X, const double* Y_sigma,
                                  int n, int d, double* h_out /* n */);

/* ---- generative sampling ------------------------------------------------ */

RKHS_API int rkhs_sample_fit(const rkhs_kernel* k, const double* X_latent, int n, int d_latent,
                             const double* Y, int d_data, rkhs_generator** out);
RKHS_API int rkhs_generate(const rkhs_generator* g, const double* Z_latent, int nz,
                           int d_latent, double* out /* nz*d_data */);
RKHS_API void rkhs_generator_free(rkhs_generator* g);

RKHS_API int rkhs_conditional_sample(const rkhs_kernel* k, const double* X_cond, int n,
                                     int d_cond, const double* Y, int d_out,
                                     const double* x_query, int n_draws, uint64_t seed,
                                     int d_eta_x, int d_eta_y, double* out /* n_draws*d_out */);
RKHS_API int rkhs_stable_invert(const rkhs_kernel* k, const double* X, int n, int d_x,
                                const double* Y, int d_y, const double* y_query, int nq,
                                double* x_out /* nq*d_x */);

/* ---- metrics ------------------------------------------------------------ */

/* kind: "rmse", "normalized", "accuracy", "ks" (out[0] = statistic,
 * out[1] = threshold when provided room) */
RKHS_API int rkhs_metric(const char* kind, const double* pred, const double* truth, int n,
                         int d, double* out, int out_len);
/* two-sample Kolmogorov-Smirnov with independent lengths */
RKHS_API int rkhs_ks(const double* a, int na, const double* b, int nb, double* stat_out,
                     double* threshold_out);
RKHS_API int rkhs_confusion(const double* pred, const double* truth, int n, int n_classes,
                            int* out /* n_classes*n_classes */);

/* ---- benchmarks --------------------------------------------------------- */

RKHS_API int rkhs_bachelier_reference(double b, double strike, double theta, double t1,
                                      double t2, double* out);
/* report is a JSON text (rkhs_free_text) */
RKHS_API int rkhs_run_bachelier(const rkhs_kernel* k, int N, int D, double theta, double t1,
                                double t2, double strike, uint64_t seed, char** report_out);
RKHS_API int rkhs_run_poisson(const rkhs_kernel* k, const double* mesh, int n, int d,
                              const double* f, int df, double* u_out /* n*df */,
                              double* residual_out);
RKHS_API int rkhs_run_heat(const rkhs_kernel* k, const double* mesh, int n, int d,
                           const double* u0, int df, double theta, double tau, int steps,
                           double* u_out /* n*df */, double* energy_out /* steps+1 */);

/* ---- utilities ---------------------------------------------------------- */

/* seeded standard normal matrix through the library's substream scheme */
RKHS_API int rkhs_normal_sample(uint64_t seed, const char* stream, int n, int d, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* RKHS_KIT_H */
