#ifndef DRC_H
#define DRC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; the nonzero ones mirror the `drc` exit codes where they
 * overlap.
 */
typedef enum DrcStatus {
  DRC_STATUS_OK = 0,
  DRC_STATUS_INPUT_ERROR = 2,
  DRC_STATUS_GUARD_EXCEEDED = 3,
  DRC_STATUS_INVARIANT_VIOLATION = 4,
  DRC_STATUS_NULL_POINTER = 5,
  DRC_STATUS_INDEX_OUT_OF_RANGE = 6,
  /**
   * A value does not fit the requested integer type.
   */
  DRC_STATUS_OVERFLOW = 7,
  DRC_STATUS_PANIC = 8,
} DrcStatus;

/**
 * Opaque handle to an enumerated, archived decomposition.
 */
typedef struct DrcDecomposition DrcDecomposition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *drc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *drc_version(void);

/**
 * Enumerates the decomposition for genus `g`, order `k` and the `n` leg
 * weights at `m`.
 *
 * # Safety
 * `m` must point to `n` readable values (it may be null when `n` is 0) and
 * `out` must be a valid pointer to write the handle to.
 */
enum DrcStatus drc_enumerate(uint32_t g,
                             uint32_t k,
                             const int64_t *m,
                             size_t n,
                             struct DrcDecomposition **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `d` must come from [`drc_enumerate`] or [`drc_archive_parse`] and not
 * have been freed.
 */
void drc_decomposition_free(struct DrcDecomposition *d);

/**
 * # Safety
 * `d` must be a live handle and `out` writable.
 */
enum DrcStatus drc_decomposition_num_strata(const struct DrcDecomposition *d, size_t *out);

/**
 * Weight of stratum `index` as a reduced fraction.
 *
 * # Safety
 * `d` must be a live handle; `num` and `den` writable.
 */
enum DrcStatus drc_decomposition_weight(const struct DrcDecomposition *d,
                                        size_t index,
                                        int64_t *num,
                                        int64_t *den);

/**
 * Fibre count and local-ring length of stratum `index`.
 *
 * # Safety
 * `d` must be a live handle; `fibre` and `length` writable.
 */
enum DrcStatus drc_decomposition_drl(const struct DrcDecomposition *d,
                                     size_t index,
                                     uint64_t *fibre,
                                     uint64_t *length);

/**
 * The archive as JSON; free the result with [`drc_string_free`].
 *
 * # Safety
 * `d` must be a live handle and `out` writable.
 */
enum DrcStatus drc_decomposition_to_json(const struct DrcDecomposition *d, char **out);

/**
 * Parses and re-verifies an archive.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum DrcStatus drc_archive_parse(const char *json, struct DrcDecomposition **out);

/**
 * Closed-form k-residue at 0 of `z^{m1} (1 - z)^{m2} (dz)^k`.
 *
 * # Safety
 * `num` and `den` must be writable.
 */
enum DrcStatus drc_step1_k_residue(uint32_t k, int64_t m1, int64_t m2, int64_t *num, int64_t *den);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void drc_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DRC_H */
