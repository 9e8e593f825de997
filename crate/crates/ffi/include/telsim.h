/* C interface of the telsim teleportation simulator. */

#ifndef TELSIM_H
#define TELSIM_H

/* Generated by cbindgen from the telsim-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible library call.
typedef enum TelsimStatus {
  // The call succeeded.
  TELSIM_STATUS_OK = 0,
  // A required pointer argument was NULL.
  TELSIM_STATUS_NULL_POINTER = 1,
  // The channel coefficients are not four strictly positive numbers with
  // unit sum of squares.
  TELSIM_STATUS_INVALID_CHANNEL = 2,
  // The POVM scaling is not a finite positive number (or `auto`).
  TELSIM_STATUS_INVALID_SCALING = 3,
  // The POVM scaling lies below the channel's admissible minimum, so an
  // element would have a negative eigenvalue.
  TELSIM_STATUS_POSITIVITY_VIOLATION = 4,
  // A run was requested with zero trials.
  TELSIM_STATUS_INVALID_TRIALS = 5,
  // A scalar argument was not a finite number.
  TELSIM_STATUS_INVALID_ARGUMENT = 6,
  // An unexpected internal failure (including a caught panic).
  TELSIM_STATUS_INTERNAL_ERROR = 7,
} TelsimStatus;

// Opaque simulator session: a validated channel plus a resolved POVM
// scaling. Create with [`telsim_session_new`], release with
// [`telsim_session_free`].
typedef struct TelsimSession TelsimSession;

// Plain-old-data summary of a Monte Carlo run, mirroring the JSON document
// of the CLI. `mean_conclusive_fidelity` is NaN when no trial was
// conclusive.
typedef struct TelsimRunStats {
  uint64_t trials;
  uint64_t conclusive_trials;
  double conclusive_rate;
  double mean_conclusive_fidelity;
  double exact_success_probability;
  double x_used;
  double min_x;
  uint64_t seed;
} TelsimRunStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a simulator session.
//
// `alpha..delta` are the channel coefficients (strictly positive, unit sum
// of squares). `x` is the POVM scaling: pass a finite positive number, or
// any value ≤ 0 to resolve it automatically to the channel's minimum. On
// success `*out_session` owns the new handle.
//
// # Safety
//
// `out_session` must be a valid pointer to writable memory for one
// `*mut TelsimSession`. The returned handle must be released exactly once
// with [`telsim_session_free`].
enum TelsimStatus telsim_session_new(double alpha,
                                     double beta,
                                     double gamma,
                                     double delta,
                                     double x,
                                     struct TelsimSession **out_session);

// Releases a session created by [`telsim_session_new`]. NULL is ignored.
//
// # Safety
//
// `session` must be NULL or a handle returned by [`telsim_session_new`]
// that has not been freed already.
void telsim_session_free(struct TelsimSession *session);

// Returns the channel's minimum admissible POVM scaling, or NaN when
// `session` is NULL.
//
// # Safety
//
// `session` must be NULL or a live handle from [`telsim_session_new`].
double telsim_session_min_x(const struct TelsimSession *session);

// Returns the session's resolved POVM scaling, or NaN when `session` is
// NULL.
//
// # Safety
//
// `session` must be NULL or a live handle from [`telsim_session_new`].
double telsim_session_x(const struct TelsimSession *session);

// Writes the deterministic (input-independent) success probability of the
// session's channel at its scaling to `*out_probability`.
//
// # Safety
//
// `session` must be NULL or a live handle from [`telsim_session_new`];
// `out_probability` must be a valid pointer to writable memory for one
// `double`.
enum TelsimStatus telsim_session_exact_success_probability(const struct TelsimSession *session,
                                                           double *out_probability);

// Runs `trials` seeded Monte Carlo teleportation trials with a fresh
// Haar-random input per trial and writes the summary to `*out_stats`.
// Identical `(session, trials, seed)` give identical results.
//
// # Safety
//
// `session` must be NULL or a live handle from [`telsim_session_new`];
// `out_stats` must be a valid pointer to writable memory for one
// `TelsimRunStats`.
enum TelsimStatus telsim_session_run(const struct TelsimSession *session,
                                     uint64_t trials,
                                     uint64_t seed,
                                     struct TelsimRunStats *out_stats);

// Writes the CHSH quantity of the singlet at four analyzer angles
// (radians) to `*out_s`. The value never exceeds 2√2.
//
// # Safety
//
// `out_s` must be a valid pointer to writable memory for one `double`.
enum TelsimStatus telsim_chsh(double a1, double a2, double b1, double b2, double *out_s);

// Returns a static, NUL-terminated description of a status code.
const char *telsim_status_message(enum TelsimStatus status);

// Returns the static, NUL-terminated library version string.
const char *telsim_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TELSIM_H */
