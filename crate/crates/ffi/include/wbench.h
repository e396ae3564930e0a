#ifndef WBENCH_H
#define WBENCH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum {
  WB_STATUS_OK = 0,
  WB_STATUS_NULL_POINTER = 1,
  WB_STATUS_INVALID_UTF8 = 2,
  WB_STATUS_PARSE = 3,
  WB_STATUS_CONFIG = 4,
  WB_STATUS_BACKEND = 5,
  WB_STATUS_FIT = 6,
  WB_STATUS_MITIGATION = 7,
  WB_STATUS_IO = 8,
  WB_STATUS_CONTRACT = 9,
  WB_STATUS_BUFFER_TOO_SMALL = 10,
  WB_STATUS_PANIC = 11,
} WbStatus;

/**
 * Opaque readout calibration matrix.
 */
typedef struct WbCalibration WbCalibration;

/**
 * Opaque Pauli-sum Hamiltonian.
 */
typedef struct WbHamiltonian WbHamiltonian;

/**
 * Opaque simulated state.
 */
typedef struct WbState WbState;

/**
 * Sinusoid fit `offset + amplitude sin(2 pi t / period + phase)` with standard errors.
 */
typedef struct {
  double offset;
  double amplitude;
  double period;
  double phase;
  double slope;
  double offset_err;
  double amplitude_err;
  double period_err;
  double phase_err;
  double slope_err;
  double residual_rms;
  bool converged;
} WbFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *wb_version(void);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL, or 0
 * when there is no error.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t wb_last_error_message(char *buf, size_t len);

/**
 * The three-qubit W state.
 *
 * # Safety
 * `out` must be valid for writes.
 */
WbStatus wb_state_w(WbState **out);

/**
 * # Safety
 * `state` must come from this library and not be used afterwards.
 */
void wb_state_free(WbState *state);

/**
 * # Safety
 * `state` must be a live handle or null.
 */
size_t wb_state_n_qubits(const WbState *state);

/**
 * Outcome probabilities over the 1-based `measured` qubits, written to
 * `probs` (length `2^n_measured`). Bit strings are indexed with the first
 * measured qubit as the most significant bit.
 *
 * # Safety
 * Pointers must be valid for the given lengths.
 */
WbStatus wb_state_probabilities(const WbState *state,
                                const size_t *measured,
                                size_t n_measured,
                                double *probs,
                                size_t probs_len);

/**
 * Exact expectation of a Pauli letter string such as `"YZY"`.
 *
 * # Safety
 * `pauli` must be a NUL-terminated string, `out` valid for writes.
 */
WbStatus wb_state_expectation(const WbState *state, const char *pauli, double *out);

/**
 * Samples `shots` measurements of all qubits into `counts` (length `2^n`).
 *
 * # Safety
 * `counts` must be valid for `counts_len` elements.
 */
WbStatus wb_state_sample(const WbState *state,
                         uint64_t shots,
                         uint64_t seed,
                         uint64_t *counts,
                         size_t counts_len);

/**
 * The six-term three-site triangle Hamiltonian.
 *
 * # Safety
 * `out` must be valid for writes.
 */
WbStatus wb_hamiltonian_triangle(WbHamiltonian **out);

/**
 * Ring Hamiltonian on `n_sites >= 3` sites.
 *
 * # Safety
 * `out` must be valid for writes.
 */
WbStatus wb_hamiltonian_ring(size_t n_sites, WbHamiltonian **out);

/**
 * # Safety
 * `h` must come from this library and not be used afterwards.
 */
void wb_hamiltonian_free(WbHamiltonian *h);

/**
 * # Safety
 * `h` must be a live handle or null.
 */
size_t wb_hamiltonian_n_terms(const WbHamiltonian *h);

/**
 * Exact energy `<state|H|state>`.
 *
 * # Safety
 * Handles must be live, `out` valid for writes.
 */
WbStatus wb_hamiltonian_expectation(const WbHamiltonian *h, const WbState *state, double *out);

/**
 * Analytic calibration matrix of independent flips with probability `p`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
WbStatus wb_calibration_bitflip(double p, size_t n_qubits, WbCalibration **out);

/**
 * Calibration matrix from `4^n` row-major entries; entry `(i, j)` is the
 * probability of reading `i` after preparing `j`.
 *
 * # Safety
 * `entries` must be valid for `len` elements, `out` for writes.
 */
WbStatus wb_calibration_from_entries(size_t n_qubits,
                                     const double *entries,
                                     size_t len,
                                     WbCalibration **out);

/**
 * # Safety
 * `cal` must come from this library and not be used afterwards.
 */
void wb_calibration_free(WbCalibration *cal);

/**
 * Bit-flip probability `(1 - mean diagonal) / n`.
 *
 * # Safety
 * `cal` must be live, `out` valid for writes.
 */
WbStatus wb_calibration_estimate_p(const WbCalibration *cal, double *out);

/**
 * # Safety
 * `cal` must be live, `out` valid for writes.
 */
WbStatus wb_calibration_condition_number(const WbCalibration *cal, double *out);

/**
 * Solves the calibration system for full-register `counts` (length `2^n`),
 * writing the unclipped quasi-probabilities to `quasi`. Fails when the
 * condition number exceeds `max_condition`.
 *
 * # Safety
 * Buffers must be valid for their lengths.
 */
WbStatus wb_calibration_mitigate(const WbCalibration *cal,
                                 const uint64_t *counts,
                                 size_t counts_len,
                                 double max_condition,
                                 double *quasi,
                                 size_t quasi_len);

/**
 * `n_qubits * p * sqrt(n_terms)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
WbStatus wb_propagated_readout_error(double p, size_t n_qubits, size_t n_terms, double *out);

/**
 * Fits a sinusoid (plus a linear drift when `with_slope`) to `values`
 * sampled at `times` in minutes.
 *
 * # Safety
 * Arrays must hold `len` elements, `out` valid for writes.
 */
WbStatus wb_fit_sinusoid(const double *times,
                         const double *values,
                         size_t len,
                         bool with_slope,
                         WbFit *out);

/**
 * Flags packet means whose robust z-score exceeds `k`. `flags` receives
 * 1 for flagged and 0 otherwise; `n_flagged` the number of flags set.
 *
 * # Safety
 * `means` and `flags` must hold `len` elements, `n_flagged` valid for writes.
 */
WbStatus wb_detect_outliers(const double *means,
                            size_t len,
                            double k,
                            uint8_t *flags,
                            size_t *n_flagged);

/**
 * Runs the job described by the TOML file at `config_path`, writing series
 * files into `out_dir` (or the configured directory when null).
 *
 * # Safety
 * Strings must be NUL-terminated; `out_dir` may be null.
 */
WbStatus wb_run_job(const char *config_path, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WBENCH_H */
