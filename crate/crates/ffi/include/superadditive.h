#ifndef SUPERADDITIVE_H
#define SUPERADDITIVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SaScheme {
  SA_SCHEME_DIRECT_PPM = 0,
  SA_SCHEME_HYBRID = 1,
} SaScheme;

/**
 * Result code of every fallible call.
 */
typedef enum SaStatus {
  SA_STATUS_OK = 0,
  SA_STATUS_NULL_POINTER = 1,
  SA_STATUS_INVALID_ARGUMENT = 2,
  SA_STATUS_UNSUPPORTED_ORDER = 3,
  SA_STATUS_CIRCUIT = 4,
  SA_STATUS_SIMULATION = 5,
  SA_STATUS_PANIC = 6,
} SaStatus;

typedef struct SaCircuitPlan SaCircuitPlan;

typedef struct SaHadamard SaHadamard;

typedef struct SaRateReport SaRateReport;

/**
 * Monte Carlo run description. `num_slices` is ignored for the direct scheme.
 */
typedef struct SaSimulationConfig {
  enum SaScheme scheme;
  double n_bar;
  size_t length;
  double lambda;
  uint64_t trials;
  uint64_t seed;
  uint32_t num_slices;
  double efficiency;
  double dark_click_probability;
  double per_op_transmission;
  bool stratified;
} SaSimulationConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *sa_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void sa_string_free(char *s);

/**
 * Normalized Hadamard matrix of `order` (1, 2, 4, 8, 12, 16, 20, 24, 28 or 32).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SaStatus sa_hadamard_construct(size_t order, struct SaHadamard **out);

/**
 * # Safety
 * `h` must be a live handle or null.
 */
void sa_hadamard_free(struct SaHadamard *h);

/**
 * Order of the matrix, 0 for a null handle.
 *
 * # Safety
 * `h` must be a live handle or null.
 */
size_t sa_hadamard_order(const struct SaHadamard *h);

/**
 * Entry `(row, col)`, +1 or -1.
 *
 * # Safety
 * `h` and `out` must be valid pointers.
 */
enum SaStatus sa_hadamard_entry(const struct SaHadamard *h, size_t row, size_t col, int8_t *out);

/**
 * Triangular beam-splitter plan of the rescaled matrix `H / sqrt(L)`.
 *
 * # Safety
 * `h` and `out` must be valid pointers.
 */
enum SaStatus sa_plan_from_hadamard(const struct SaHadamard *h, struct SaCircuitPlan **out);

/**
 * Loss-equalized copy of `plan` with every beam splitter transmitting
 * `per_op_transmission`; the overall transmission goes to `eta`.
 *
 * # Safety
 * All pointers must be valid.
 */
enum SaStatus sa_plan_equalize(const struct SaCircuitPlan *plan,
                               double per_op_transmission,
                               struct SaCircuitPlan **out,
                               double *eta);

/**
 * # Safety
 * `plan` must be a live handle or null.
 */
void sa_plan_free(struct SaCircuitPlan *plan);

/**
 * Number of modes, 0 for a null handle.
 *
 * # Safety
 * `plan` must be a live handle or null.
 */
size_t sa_plan_num_modes(const struct SaCircuitPlan *plan);

/**
 * Number of beam splitters, 0 for a null handle.
 *
 * # Safety
 * `plan` must be a live handle or null.
 */
size_t sa_plan_num_beam_splitters(const struct SaCircuitPlan *plan);

/**
 * Propagates `len` complex amplitudes, given as separate real and imaginary
 * arrays, through the plan. `len` must equal the number of modes.
 *
 * # Safety
 * The four arrays must hold `len` doubles each.
 */
enum SaStatus sa_plan_apply(const struct SaCircuitPlan *plan,
                            const double *re_in,
                            const double *im_in,
                            size_t len,
                            double *re_out,
                            double *im_out);

/**
 * Plan in its text format; release with `sa_string_free`. Null on failure.
 *
 * # Safety
 * `plan` must be a live handle or null.
 */
char *sa_plan_to_text(const struct SaCircuitPlan *plan);

/**
 * Minimum error probability for `±α` with `|α|² = n_eff`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SaStatus sa_helstrom_error(double n_eff, double *out);

/**
 * Bits per bin with optimal individual detection.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SaStatus sa_rate_individual(double n_bar, double *out);

/**
 * Holevo quantity of the BPSK ensemble, bits per bin.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SaStatus sa_holevo_bpsk(double n_bar, double *out);

/**
 * Direct-detection PPM rate, bits per bin.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SaStatus sa_rate_ppm(double n_bar, double length, double *out);

/**
 * Hybrid-scheme rate at mixing weight `lambda`, bits per bin.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SaStatus sa_rate_hybrid(double n_bar, size_t length, double lambda, double *out);

/**
 * Mixing weight maximizing the hybrid rate, and that rate.
 *
 * # Safety
 * Both output pointers must be valid.
 */
enum SaStatus sa_optimize_lambda(double n_bar, size_t length, double *lambda_out, double *rate_out);

/**
 * Runs a Monte Carlo simulation and compares it with the analytic rate.
 *
 * # Safety
 * `config` and `out` must be valid pointers.
 */
enum SaStatus sa_simulate(const struct SaSimulationConfig *config, struct SaRateReport **out);

/**
 * # Safety
 * `report` must be a live handle or null.
 */
void sa_report_free(struct SaRateReport *report);

/**
 * Analytic rate in bits per bin; NaN for a null handle.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
double sa_report_analytic_rate(const struct SaRateReport *report);

/**
 * Empirical rate in bits per bin; NaN for a null handle.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
double sa_report_empirical_rate(const struct SaRateReport *report);

/**
 * Bootstrap standard error of the empirical rate; NaN for a null handle.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
double sa_report_empirical_stderr(const struct SaRateReport *report);

/**
 * Full report as JSON; release with `sa_string_free`.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
char *sa_report_json(const struct SaRateReport *report);

/**
 * Confusion matrix as CSV; release with `sa_string_free`.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
char *sa_report_confusion_csv(const struct SaRateReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUPERADDITIVE_H */
