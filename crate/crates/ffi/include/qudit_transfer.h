#ifndef QUDIT_TRANSFER_H
#define QUDIT_TRANSFER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum QtStatus {
  QT_STATUS_OK = 0,
  QT_STATUS_NULL_POINTER = 1,
  QT_STATUS_INVALID_ARGUMENT = 2,
  QT_STATUS_SIZE_LIMIT = 3,
  QT_STATUS_NUMERICAL_FAILURE = 4,
  QT_STATUS_ZERO_PROBABILITY = 5,
  QT_STATUS_BUFFER_TOO_SMALL = 6,
  QT_STATUS_INTERNAL = 7,
  QT_STATUS_PANIC = 8,
} QtStatus;

typedef enum QtMode {
  QT_MODE_SPECTRAL = 0,
  QT_MODE_EXACT = 1,
} QtMode;

typedef enum QtStrategy {
  QT_STRATEGY_OPTIMIZED = 0,
  QT_STRATEGY_REGULAR = 1,
} QtStrategy;

typedef enum QtOutcome {
  QT_OUTCOME_FAILURE = 0,
  QT_OUTCOME_SUCCESS = 1,
} QtOutcome;

// A chain together with its cached sector eigenbasis.
typedef struct QtChain QtChain;

// Outcome of one protocol run.
typedef struct QtProtocolResult QtProtocolResult;

// One evolve-and-measure round.
typedef struct QtRecord {
  // 1-based iteration number.
  size_t index;
  // Evolution time `Jt` of this round.
  double jt;
  // Receiver success probability before the measurement.
  double p;
  enum QtOutcome outcome;
  // The outcome was scripted rather than sampled.
  bool forced;
  // The optimum sat on the edge of its search window.
  bool at_boundary;
} QtRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread. The pointer stays
// valid until the next failing call on the same thread. Never null.
const char *qt_last_error_message(void);

// Builds a chain of `n_sites` `d`-level sites and diagonalises its
// one-excitation sector.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum QtStatus qt_chain_new(size_t n_sites,
                           size_t d,
                           double j,
                           double b_field,
                           enum QtMode mode,
                           struct QtChain **out);

// # Safety
// `chain` must come from [`qt_chain_new`] and not have been freed. Null is
// accepted and ignored.
void qt_chain_free(struct QtChain *chain);

// `|F_{N1}(Jt)|²`, the sender-to-receiver transfer probability.
//
// # Safety
// `chain` must be a live handle and `out` writable.
enum QtStatus qt_chain_receiver_probability(const struct QtChain *chain, double jt, double *out);

// Writes the `N × N` propagator `F(Jt)` in row-major order, real and
// imaginary parts split across `re` and `im`. Both buffers need `len >= N²`.
//
// # Safety
// `chain` must be a live handle; `re` and `im` must hold `len` doubles.
enum QtStatus qt_chain_propagator(const struct QtChain *chain,
                                  double jt,
                                  double *re,
                                  double *im,
                                  size_t len);

// Coefficients `b_0 … b_{d-1}` of the swap as a polynomial in `S·S`.
//
// # Safety
// `out` must hold `len` doubles.
enum QtStatus qt_swap_coefficients(size_t d, double *out, size_t len, double *residual);

// Runs the iterative protocol on `chain`.
//
// The payload holds the `d - 1` amplitudes of levels `1 … d-1` and is
// normalised here. `script` may be null or a string over `S`/`F` forcing
// the first outcomes; remaining outcomes are sampled with `seed`.
//
// # Safety
// `chain` must be a live handle, `payload_re`/`payload_im` must hold
// `payload_len` doubles, `script` must be null or NUL-terminated, and
// `out` writable.
enum QtStatus qt_run_protocol(const struct QtChain *chain,
                              const double *payload_re,
                              const double *payload_im,
                              size_t payload_len,
                              enum QtStrategy strategy,
                              size_t max_iter,
                              uint64_t seed,
                              const char *script,
                              struct QtProtocolResult **out);

// # Safety
// `result` must come from [`qt_run_protocol`] and not have been freed.
// Null is accepted and ignored.
void qt_result_free(struct QtProtocolResult *result);

// Number of recorded iterations.
//
// # Safety
// `result` must be a live handle and `out` writable.
enum QtStatus qt_result_len(const struct QtProtocolResult *result, size_t *out);

// # Safety
// `result` must be a live handle and `out` writable.
enum QtStatus qt_result_record(const struct QtProtocolResult *result,
                               size_t index,
                               struct QtRecord *out);

// Cumulative failure probability after the last recorded iteration.
//
// # Safety
// `result` must be a live handle and `out` writable.
enum QtStatus qt_result_p_fail(const struct QtProtocolResult *result, double *out);

// Total evolution time `Σ Jt_k`.
//
// # Safety
// `result` must be a live handle and `out` writable.
enum QtStatus qt_result_total_time(const struct QtProtocolResult *result, double *out);

// Phase-corrected receiver amplitudes of levels `1 … d-1` after a success.
// Fails with `QT_STATUS_INVALID_ARGUMENT` if the run never succeeded.
//
// # Safety
// `result` must be a live handle; `re` and `im` must hold `len` doubles.
enum QtStatus qt_result_recovered(const struct QtProtocolResult *result,
                                  double *re,
                                  double *im,
                                  size_t len);

// Least-squares fit of `y = A x^(-α)` in log-log space.
//
// # Safety
// `xs` and `ys` must hold `len` doubles; the outputs must be writable.
enum QtStatus qt_powerlaw_fit(const double *xs,
                              const double *ys,
                              size_t len,
                              double *amplitude,
                              double *exponent,
                              double *r_squared);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUDIT_TRANSFER_H */
