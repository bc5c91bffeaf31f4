/* coamp.h - C interface to the coherent-state amplification library.
 *
 * Every function returns a coamp_status. On failure the message is
 * available from coamp_last_error() on the same thread until the next call.
 * Objects are opaque handles released with their *_free function; strings
 * returned through char** are released with coamp_string_free.
 */
#ifndef COAMP_COAMP_H
#define COAMP_COAMP_H

#include <stddef.h>

#if defined(COAMP_BUILDING_LIBRARY)
#define COAMP_API __attribute__((visibility("default")))
#else
#define COAMP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  COAMP_OK = 0,
  COAMP_ERR_INVALID_ARGUMENT = 1,
  COAMP_ERR_DIMENSION_MISMATCH = 2,
  COAMP_ERR_DIMENSION_OVERFLOW = 3,
  COAMP_ERR_NOT_PSD = 4,
  COAMP_ERR_ILL_CONDITIONED = 5,
  COAMP_ERR_INCONCLUSIVE = 6,
  COAMP_ERR_NUMERIC = 7,
  COAMP_ERR_IO = 8,
  COAMP_ERR_INTERNAL = 9
} coamp_status;

typedef enum {
  COAMP_FEASIBLE = 0,
  COAMP_INFEASIBLE = 1,
  COAMP_INCONCLUSIVE = 2
} coamp_verdict;

typedef enum {
  COAMP_BINDING_PI_POSITIVITY = 0,
  COAMP_BINDING_PROBABILITY_DIAGONAL = 1,
  COAMP_BINDING_RESIDUAL_POSITIVITY = 2,
  COAMP_BINDING_ANALYTIC_BOUNDARY = 3
} coamp_binding;

/* amplitude >= 0, phase in radians (normalized into [0, 2 pi)). */
typedef struct {
  double amplitude;
  double phase;
} coamp_label;

typedef struct {
  coamp_verdict verdict;
  double margin;
  coamp_binding binding;
  int iterations;
} coamp_report;

typedef struct coamp_matrix coamp_matrix;
typedef struct coamp_kraus coamp_kraus;
typedef struct coamp_wigner coamp_wigner;
typedef struct coamp_sweep_spec coamp_sweep_spec;
typedef struct coamp_sweep_result coamp_sweep_result;
typedef struct coamp_trajectory coamp_trajectory;

COAMP_API const char* coamp_version(void);
COAMP_API const char* coamp_last_error(void);
COAMP_API const char* coamp_status_name(coamp_status status);
COAMP_API const char* coamp_verdict_name(coamp_verdict verdict);
COAMP_API const char* coamp_binding_name(coamp_binding binding);
COAMP_API void coamp_string_free(char* s);

/* Labels and geometry. */
COAMP_API coamp_status coamp_label_normalize(coamp_label in, coamp_label* out);
COAMP_API coamp_status coamp_overlap(coamp_label a, coamp_label b, double* re, double* im);
COAMP_API coamp_status coamp_distance(coamp_label a, coamp_label b, double* out);
/* Photon-number cutoff N (vectors have N + 1 entries). */
COAMP_API coamp_status coamp_truncation_cutoff(const coamp_label* labels, size_t n,
                                               double tail_epsilon, size_t* cutoff);

/* Dense complex matrices. */
COAMP_API size_t coamp_matrix_rows(const coamp_matrix* m);
COAMP_API size_t coamp_matrix_cols(const coamp_matrix* m);
COAMP_API coamp_status coamp_matrix_get(const coamp_matrix* m, size_t i, size_t j, double* re,
                                        double* im);
COAMP_API void coamp_matrix_free(coamp_matrix* m);
COAMP_API coamp_status coamp_gram(const coamp_label* labels, size_t n, coamp_matrix** out);

/* Two-state amplifier. */
COAMP_API coamp_status coamp_exact_feasible(coamp_label a1, coamp_label a2, double g1, double g2,
                                            coamp_report* out);
COAMP_API coamp_status coamp_fold_phase(double eta, double* out);
COAMP_API coamp_status coamp_envelope(double eta, double g1, double g2, int* passes,
                                      double* bound);
COAMP_API coamp_status coamp_equality_locus(double g1, double g2, double* ratio);
COAMP_API coamp_status coamp_corollary(double a1, double a2, double eta, double g1,
                                       coamp_report* out, double* implied_g2);
COAMP_API coamp_status coamp_max_gain(coamp_label a1, coamp_label a2, int* unbounded,
                                      double* g1max, double* g2max);

/* Witness search for |a_i> -> |b_i>, i < n. `pi_out` and `witness` may be
 * NULL; `*witness` is set to NULL when no witness was found. */
COAMP_API coamp_status coamp_pi_deterministic(const coamp_label* a, const coamp_label* b,
                                              size_t n, double tol, coamp_matrix** pi_out,
                                              coamp_report* out);
COAMP_API coamp_status coamp_dykstra(const coamp_label* a, const coamp_label* b, size_t n,
                                     const double* p, int max_iters, double tol,
                                     coamp_report* out, coamp_matrix** witness);
COAMP_API coamp_status coamp_max_uniform_success(const coamp_label* a, const coamp_label* b,
                                                 size_t n, double tol, double* p);

/* Kraus operators. `p` NULL selects the deterministic construction.
 * `*out` is NULL when the transformation is not feasible. */
typedef struct {
  size_t dim;
  size_t success_count;
  int completed;
  double max_action;
  double max_eq14;
  double span_completeness;
  double full_completeness;
  double gram_transport;
  double span_eig_min;
  double span_eig_max;
} coamp_kraus_summary;

COAMP_API coamp_status coamp_kraus_build(const coamp_label* a, const coamp_label* b, size_t n,
                                         const double* p, double tail_epsilon, int complete,
                                         coamp_report* feasibility, coamp_kraus** out);
COAMP_API coamp_status coamp_kraus_from_json(const char* json, coamp_kraus** out);
COAMP_API coamp_status coamp_kraus_summary_get(const coamp_kraus* k, coamp_kraus_summary* out);
COAMP_API coamp_status coamp_kraus_operator(const coamp_kraus* k, size_t index,
                                            coamp_matrix** out);
COAMP_API coamp_status coamp_kraus_to_json(const coamp_kraus* k, char** out);
COAMP_API void coamp_kraus_free(coamp_kraus* k);

/* Wigner function grids. `window` is {x_min, x_max, p_min, p_max} or NULL
 * for six standard deviations around the state. */
COAMP_API coamp_status coamp_wigner_value(coamp_label label, double x, double p, double* out);
COAMP_API coamp_status coamp_wigner_grid(coamp_label label, const double* window,
                                         size_t resolution, coamp_wigner** out);
COAMP_API coamp_status coamp_wigner_integral(const coamp_wigner* w, double* out);
COAMP_API coamp_status coamp_wigner_max(const coamp_wigner* w, double* out);
COAMP_API coamp_status coamp_wigner_to_csv(const coamp_wigner* w, char** out);
COAMP_API coamp_status coamp_wigner_to_json(const coamp_wigner* w, char** out);
COAMP_API coamp_status coamp_wigner_from_json(const char* json, coamp_wigner** out);
COAMP_API void coamp_wigner_free(coamp_wigner* w);

/* Parameter sweeps. Axes are named alpha1, alpha2, eta, g1, g2. */
typedef struct {
  double alpha1, alpha2, eta, g1, g2;
  int feasible;
  double margin;
  int has_g1max;
  double g1max;
} coamp_sweep_row;

COAMP_API coamp_status coamp_sweep_spec_new(coamp_sweep_spec** out);
COAMP_API coamp_status coamp_sweep_spec_fix(coamp_sweep_spec* s, const char* axis, double value);
COAMP_API coamp_status coamp_sweep_spec_range(coamp_sweep_spec* s, const char* axis, double min,
                                              double max, size_t steps);
COAMP_API coamp_status coamp_sweep_spec_points(const coamp_sweep_spec* s, size_t* out);
COAMP_API void coamp_sweep_spec_free(coamp_sweep_spec* s);
/* threads = 0 uses the hardware concurrency. */
COAMP_API coamp_status coamp_sweep_run(const coamp_sweep_spec* s, unsigned threads,
                                       coamp_sweep_result** out);
COAMP_API size_t coamp_sweep_result_size(const coamp_sweep_result* r);
COAMP_API coamp_status coamp_sweep_result_row(const coamp_sweep_result* r, size_t i,
                                              coamp_sweep_row* out);
COAMP_API coamp_status coamp_sweep_result_csv(const coamp_sweep_result* r, char** out);
COAMP_API void coamp_sweep_result_free(coamp_sweep_result* r);

/* Pure-loss channel. */
typedef struct {
  double time;
  double distance;
  double rate;
  double analytic_rate;
  double fd_rate;
} coamp_decay;

typedef struct {
  double t;
  double d_plain;
  double d_amp;
  double ratio;
  double sigma_plain;
  double sigma_amp;
} coamp_comparison;

COAMP_API coamp_status coamp_loss_evolve(coamp_label label, double gamma, double t,
                                         coamp_label* out);
/* Writes n reports into caller-provided `out`. */
COAMP_API coamp_status coamp_distance_trajectory(coamp_label a, coamp_label b, double gamma,
                                                 const double* times, size_t n,
                                                 coamp_decay* out);
COAMP_API coamp_status coamp_trajectory_new(coamp_label a, coamp_label b, double g1, double g2,
                                            double gamma, const double* times, size_t n,
                                            coamp_trajectory** out);
COAMP_API size_t coamp_trajectory_size(const coamp_trajectory* t);
COAMP_API int coamp_trajectory_feasible(const coamp_trajectory* t);
COAMP_API coamp_status coamp_trajectory_row(const coamp_trajectory* t, size_t i,
                                            coamp_comparison* out);
COAMP_API coamp_status coamp_trajectory_csv(const coamp_trajectory* t, char** out);
COAMP_API void coamp_trajectory_free(coamp_trajectory* t);

/* Discrimination. */
COAMP_API coamp_status coamp_helstrom_error(coamp_label a, coamp_label b, double prior_a,
                                            double* out);
COAMP_API coamp_status coamp_click_error(coamp_label a, coamp_label b, double dark_prob,
                                         double efficiency, double prior_a, double* p_err,
                                         char** rule);

#ifdef __cplusplus
}
#endif

#endif /* COAMP_COAMP_H */
