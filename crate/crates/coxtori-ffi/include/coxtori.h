#ifndef COXTORI_H
#define COXTORI_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CoxtoriStatus {
  COXTORI_STATUS_OK = 0,
  COXTORI_STATUS_NULL_POINTER = 1,
  COXTORI_STATUS_INVALID_ARGUMENT = 2,
  COXTORI_STATUS_UNSUPPORTED = 3,
  COXTORI_STATUS_BUFFER_TOO_SMALL = 4,
  COXTORI_STATUS_OVERFLOW = 5,
  COXTORI_STATUS_PANIC = 6,
} CoxtoriStatus;

/**
 * A root datum with Frobenius, built from a family, rank and isogeny.
 */
typedef struct CoxtoriDatum CoxtoriDatum;

/**
 * A finished verification report.
 */
typedef struct CoxtoriReport CoxtoriReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code. Never null.
 */
const char *coxtori_status_message(enum CoxtoriStatus status);

/**
 * Build a datum. `family` is one of `A B C D 2A 2D`; `isogeny` is `model`,
 * `adjoint`, `sc` or null for the model.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum CoxtoriStatus coxtori_datum_new(const char *family,
                                     uint32_t rank,
                                     const char *isogeny,
                                     struct CoxtoriDatum **out);

/**
 * # Safety
 * `d` must be null or a handle from [`coxtori_datum_new`] not yet freed.
 */
void coxtori_datum_free(struct CoxtoriDatum *d);

/**
 * Rank of the cocharacter lattice.
 *
 * # Safety
 * `d` must be a live handle and `out` writable.
 */
enum CoxtoriStatus coxtori_datum_rank(const struct CoxtoriDatum *d, uint32_t *out);

/**
 * Order of the Frobenius coinvariants of the fundamental group; `0` when
 * infinite. `adjoint` selects the fundamental group of the adjoint quotient.
 *
 * # Safety
 * `d` must be a live handle and `out` writable.
 */
enum CoxtoriStatus coxtori_pi1_coinvariants_order(const struct CoxtoriDatum *d,
                                                  bool adjoint,
                                                  uint64_t *out);

/**
 * Fixed point of `c_kappa sigma` on the apartment, normalized modulo the
 * center. `*len` receives the number of coordinates even when the buffers
 * are too small.
 *
 * # Safety
 * `d` must be a live handle; `num` and `den` must hold `cap` entries.
 */
enum CoxtoriStatus coxtori_fixed_point(const struct CoxtoriDatum *d,
                                       int64_t kappa,
                                       int64_t *num,
                                       int64_t *den,
                                       size_t cap,
                                       size_t *len);

/**
 * Valuation bounds `<alpha, x>` over the cross-section roots, for `c_kappa`.
 *
 * # Safety
 * As for [`coxtori_fixed_point`].
 */
enum CoxtoriStatus coxtori_bound_table(const struct CoxtoriDatum *d,
                                       int64_t kappa,
                                       int64_t *num,
                                       int64_t *den,
                                       size_t cap,
                                       size_t *len);

/**
 * Run the verification report for one model group. `sections` is a
 * comma-separated list such as `"pi1,bounds"`, or null for all sections.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum CoxtoriStatus coxtori_report_new(const char *family,
                                      uint32_t rank,
                                      const char *sections,
                                      uint64_t seed,
                                      struct CoxtoriReport **out);

/**
 * # Safety
 * `r` must be null or a handle from [`coxtori_report_new`] not yet freed.
 */
void coxtori_report_free(struct CoxtoriReport *r);

/**
 * Total and failed check counts.
 *
 * # Safety
 * `r` must be a live handle; `total` and `failed` writable.
 */
enum CoxtoriStatus coxtori_report_counts(const struct CoxtoriReport *r,
                                         size_t *total,
                                         size_t *failed);

/**
 * The report as JSON. Release the string with [`coxtori_string_free`].
 *
 * # Safety
 * `r` must be a live handle and `out` writable.
 */
enum CoxtoriStatus coxtori_report_json(const struct CoxtoriReport *r, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void coxtori_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COXTORI_H */
