#ifndef DKCALC_H
#define DKCALC_H

/* Generated by cbindgen from dkcalc-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes for every fallible entry point.
 */
typedef enum DkStatus {
  DkStatus_Ok = 0,
  /**
   * A pointer argument was null or not valid UTF-8/JSON.
   */
  DkStatus_InvalidArgument = 1,
  /**
   * Operands live in different algebras or truncations.
   */
  DkStatus_Structural = 2,
  /**
   * A value precondition failed (constant terms, invariance, ...).
   */
  DkStatus_Domain = 3,
  /**
   * A stated hypothesis of the underlying theory was violated.
   */
  DkStatus_ContractViolation = 4,
  /**
   * Text or JSON could not be parsed.
   */
  DkStatus_Parse = 5,
  /**
   * Outside the supported size or degree guards.
   */
  DkStatus_Unsupported = 6,
} DkStatus;

/**
 * An interned generator alphabet.
 */
typedef struct DkAlphabet DkAlphabet;

/**
 * A truncated graded series with exact rational coefficients.
 */
typedef struct DkSeries DkSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the underlying engine, as a static string.
 */
const char *dkcalc_version(void);

/**
 * Message for the most recent failure on this thread. Free the returned
 * string with `dkcalc_string_free`.
 */
char *dkcalc_last_error(void);

/**
 * Runs one JSON request against the engine and returns the JSON response
 * (always a complete response object, also for residuals and contract
 * errors; the embedded `status` field mirrors the CLI exit code). Returns
 * null only when the request itself is unreadable.
 */
char *dkcalc_run_json(const char *request);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `ptr` must have been produced by a `dkcalc_*` function and not freed yet.
 */
void dkcalc_string_free(char *ptr);

/**
 * Creates an alphabet from a comma-separated list of `label` or
 * `label:degree` entries (degree defaults to 1).
 */
enum DkStatus dkcalc_alphabet_new(const char *spec, struct DkAlphabet **out);

/**
 * # Safety
 * `ptr` must come from `dkcalc_alphabet_new` and not be freed twice.
 */
void dkcalc_alphabet_free(struct DkAlphabet *ptr);

/**
 * Parses a series in the text form `c1 * g1.g2 + c2 * g3 + ...` at the
 * given truncation degree.
 */
enum DkStatus dkcalc_series_parse(const struct DkAlphabet *alphabet,
                                  uint32_t truncation,
                                  const char *text,
                                  struct DkSeries **out);

/**
 * Canonical text rendering of a series; free with `dkcalc_string_free`.
 */
enum DkStatus dkcalc_series_format(const struct DkSeries *series, char **out);

enum DkStatus dkcalc_series_add(const struct DkSeries *a,
                                const struct DkSeries *b,
                                struct DkSeries **out);

enum DkStatus dkcalc_series_mul(const struct DkSeries *a,
                                const struct DkSeries *b,
                                struct DkSeries **out);

/**
 * exp of a series with zero constant term.
 */
enum DkStatus dkcalc_series_exp(const struct DkSeries *a, struct DkSeries **out);

/**
 * log of a series with constant term 1.
 */
enum DkStatus dkcalc_series_log(const struct DkSeries *a, struct DkSeries **out);

/**
 * Multiplicative inverse of a series with constant term 1.
 */
enum DkStatus dkcalc_series_inverse(const struct DkSeries *a, struct DkSeries **out);

/**
 * # Safety
 * `ptr` must come from a series-producing call and not be freed twice.
 */
void dkcalc_series_free(struct DkSeries *ptr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DKCALC_H */
