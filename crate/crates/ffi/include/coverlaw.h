#ifndef COVERLAW_H
#define COVERLAW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CoverlawStatus {
  COVERLAW_STATUS_OK = 0,
  COVERLAW_STATUS_NULL_POINTER = 1,
  COVERLAW_STATUS_INVALID_UTF8 = 2,
  COVERLAW_STATUS_MALFORMED_INPUT = 3,
  COVERLAW_STATUS_INVALID_LATTICE = 4,
  COVERLAW_STATUS_OUT_OF_RANGE = 5,
  COVERLAW_STATUS_BUFFER_TOO_SMALL = 6,
  COVERLAW_STATUS_INTERNAL = 7,
} CoverlawStatus;

/**
 * Opaque handle to a validated ortholattice.
 */
typedef struct CoverlawLattice CoverlawLattice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *coverlaw_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *coverlaw_version(void);

/**
 * Builds a lattice from its JSON description. On success `*out` owns a
 * handle that must be released with [`coverlaw_lattice_free`].
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum CoverlawStatus coverlaw_lattice_from_json(const char *json, struct CoverlawLattice **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `lattice` must come from [`coverlaw_lattice_from_json`] and not be used afterwards.
 */
void coverlaw_lattice_free(struct CoverlawLattice *lattice);

/**
 * # Safety
 * `lattice` must be a live handle; `out` must be writable.
 */
enum CoverlawStatus coverlaw_lattice_size(const struct CoverlawLattice *lattice, size_t *out);

/**
 * # Safety
 * `lattice` must be a live handle; `out` must be writable.
 */
enum CoverlawStatus coverlaw_lattice_meet(const struct CoverlawLattice *lattice,
                                          size_t a,
                                          size_t b,
                                          size_t *out);

/**
 * # Safety
 * `lattice` must be a live handle; `out` must be writable.
 */
enum CoverlawStatus coverlaw_lattice_join(const struct CoverlawLattice *lattice,
                                          size_t a,
                                          size_t b,
                                          size_t *out);

/**
 * # Safety
 * `lattice` must be a live handle; `out` must be writable.
 */
enum CoverlawStatus coverlaw_lattice_ortho(const struct CoverlawLattice *lattice,
                                           size_t a,
                                           size_t *out);

/**
 * # Safety
 * `lattice` must be a live handle; `out` must be writable.
 */
enum CoverlawStatus coverlaw_lattice_commutes(const struct CoverlawLattice *lattice,
                                              size_t a,
                                              size_t b,
                                              bool *out);

/**
 * Checks a named property (`orthomodular`, `covering_law`, ...). `*pass`
 * receives the verdict. On failure the witness elements are copied into
 * `witness` (capacity `witness_cap`) and `*witness_len` receives their
 * count; it is 0 when the property holds. `witness` may be null when
 * `witness_cap` is 0.
 *
 * # Safety
 * `lattice` must be a live handle, `property` a nul-terminated string,
 * `pass` and `witness_len` writable, `witness` valid for `witness_cap` writes.
 */
enum CoverlawStatus coverlaw_lattice_check(const struct CoverlawLattice *lattice,
                                           const char *property,
                                           bool *pass,
                                           size_t *witness,
                                           size_t witness_cap,
                                           size_t *witness_len);

/**
 * Runs the batch driver with `argv` (without the program name). `*exit_code`
 * receives the driver's exit status and `*report` an owned string with the
 * JSON-lines report (empty when `--output` names a file). Release it with
 * [`coverlaw_string_free`]. Diagnostics that the command line tool would
 * print on stderr are available from [`coverlaw_last_error`] when the exit
 * status is non-zero.
 *
 * # Safety
 * `argv` must hold `argc` nul-terminated strings; `exit_code` and `report` must be writable.
 */
enum CoverlawStatus coverlaw_run(int argc, const char *const *argv, int *exit_code, char **report);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void coverlaw_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COVERLAW_H */
