#ifndef COLLAR_FORGE_H
#define COLLAR_FORGE_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every FFI entry point.
 */
typedef enum CfStatus {
  /**
   * Success.
   */
  CF_STATUS_CF_OK = 0,
  /**
   * A pointer argument was null.
   */
  CF_STATUS_CF_NULL_POINTER = 1,
  /**
   * Arguments were malformed (bad UTF-8/JSON, unknown fixture,
   * out-of-range parameter).
   */
  CF_STATUS_CF_INVALID_ARGUMENT = 2,
  /**
   * Construction or verification failed; see the error message.
   */
  CF_STATUS_CF_RUNTIME_ERROR = 3,
  /**
   * Verification completed and reported a failing verdict.
   */
  CF_STATUS_CF_VERIFICATION_FAILED = 4,
  /**
   * A panic was caught at the boundary.
   */
  CF_STATUS_CF_PANIC = 5,
} CfStatus;

/**
 * Opaque validated-collar handle.
 */
typedef struct CfCollar CfCollar;

/**
 * Opaque fixture handle.
 */
typedef struct CfFixture CfFixture;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message for this thread; empty string if none. The
 * pointer stays valid until the next failing call on the thread.
 */
const char *cf_last_error_message(void);

/**
 * Create a fixture by name with JSON parameters (e.g. `{"r": 1.0}`);
 * `params_json` may be null for defaults.
 *
 * # Safety
 * `name` must be a NUL-terminated string, `params_json` null or
 * NUL-terminated, and `out` a valid pointer.
 */
enum CfStatus cf_fixture_new(const char *name, const char *params_json, struct CfFixture **out);

/**
 * Release a fixture handle. Null is a no-op.
 *
 * # Safety
 * `fixture` must have come from `cf_fixture_new` and not been freed.
 */
void cf_fixture_free(struct CfFixture *fixture);

/**
 * Construct and validate the global collar of a fixture.
 *
 * # Safety
 * `fixture` must be a live handle and `out` a valid pointer.
 */
enum CfStatus cf_collar_build(const struct CfFixture *fixture,
                              uint64_t seed,
                              struct CfCollar **out);

/**
 * Release a collar handle. Null is a no-op.
 *
 * # Safety
 * `collar` must have come from `cf_collar_build` and not been freed.
 */
void cf_collar_free(struct CfCollar *collar);

/**
 * Ambient dimension of the collar's coordinates.
 *
 * # Safety
 * `collar` must be a live handle.
 */
uintptr_t cf_collar_dim(const struct CfCollar *collar);

/**
 * Evaluate the global collar at a base point `x` (length `dim`) and
 * height `t` in [0,1], writing `dim` coordinates to `out`.
 *
 * # Safety
 * `x` and `out` must point to `dim` readable/writable doubles.
 */
enum CfStatus cf_collar_evaluate(const struct CfCollar *collar,
                                 const double *x,
                                 uintptr_t dim,
                                 double t,
                                 double *out);

/**
 * Run the Lipschitz verification with `n_pairs` sampled pairs and
 * write the full report as a JSON string to `out_json` (release with
 * `cf_string_free`). Returns `CF_OK` when all verdicts pass and
 * `CfVerificationFailed` when the report contains a failing verdict;
 * in both cases the report is written.
 *
 * # Safety
 * `collar` must be a live handle and `out_json` a valid pointer.
 */
enum CfStatus cf_collar_verify_json(const struct CfCollar *collar,
                                    uintptr_t n_pairs,
                                    uint64_t seed,
                                    char **out_json);

/**
 * Serialize a fixture's description as JSON (release with
 * `cf_string_free`).
 *
 * # Safety
 * `fixture` must be a live handle and `out_json` a valid pointer.
 */
enum CfStatus cf_fixture_to_json(const struct CfFixture *fixture, char **out_json);

/**
 * Free a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must have been returned by a `cf_*` function and not yet freed.
 */
void cf_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* COLLAR_FORGE_H */
