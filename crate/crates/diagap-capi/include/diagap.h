/* diagap C API. See the crate documentation for ownership rules. */

#ifndef DIAGAP_H
#define DIAGAP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum DiagapStatus {
  /**
   * Success.
   */
  DiagapOk = 0,
  /**
   * Input outside the operation's domain.
   */
  DiagapDomain = 1,
  /**
   * A certificate failed verification.
   */
  DiagapCertificate = 2,
  /**
   * A work or memory budget was exceeded.
   */
  DiagapBudget = 3,
  /**
   * I/O or serialization failure.
   */
  DiagapIo = 4,
  /**
   * A required pointer argument was null or not valid UTF-8.
   */
  DiagapBadPointer = 5,
  /**
   * An internal invariant failed (panic caught at the boundary).
   */
  DiagapInternal = 6,
} DiagapStatus;

/**
 * Opaque diagonal form handle.
 */
typedef struct DiagapForm DiagapForm;

/**
 * Opaque gap witness handle.
 */
typedef struct DiagapWitness DiagapWitness;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message for the most recent error on this thread. The pointer stays
 * valid until the next failing call on the same thread; do not free it.
 */
const char *diagap_last_error(void);

/**
 * Release a string returned through an out-pointer.
 */
void diagap_string_free(char *s);

/**
 * Parse a form spec `<degree>:<c1>,<c2>,...` into a new handle.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DiagapStatus diagap_form_parse(const char *spec, struct DiagapForm **out);

/**
 * Release a form handle.
 *
 * # Safety
 * `form` must be a pointer from `diagap_form_parse` (or null).
 */
void diagap_form_free(struct DiagapForm *form);

/**
 * Exact count r_F(residue, p) at a prime p, as a decimal string (counts can
 * exceed 64 bits for quartic forms at large primes).
 *
 * # Safety
 * `form` must be a live form handle, `out_count` a valid pointer.
 */
enum DiagapStatus diagap_count_prime(const struct DiagapForm *form,
                                     uint64_t prime,
                                     uint64_t residue,
                                     char **out_count);

/**
 * Classify a quartic form; writes 1 for exceptional, 0 otherwise.
 *
 * # Safety
 * `form` must be a live form handle, `out_exceptional` a valid pointer.
 */
enum DiagapStatus diagap_classify(const struct DiagapForm *form, int32_t *out_exceptional);

/**
 * Build a gap witness. `target_epsilon` and `beta` are `num/den` strings;
 * `target_epsilon` may be null for the default 1/(2K).
 *
 * # Safety
 * `form` must be a live form handle; string arguments NUL-terminated; `out`
 * a valid pointer.
 */
enum DiagapStatus diagap_witness_build(const struct DiagapForm *form,
                                       uint32_t gap_length,
                                       const char *target_epsilon,
                                       const char *beta,
                                       uint64_t scan_limit,
                                       uintptr_t max_primes,
                                       struct DiagapWitness **out);

/**
 * Parse a witness JSON document into a new handle.
 *
 * # Safety
 * `json` must be NUL-terminated, `out` valid.
 */
enum DiagapStatus diagap_witness_from_json(const char *json, struct DiagapWitness **out);

/**
 * Serialize a witness back to JSON.
 *
 * # Safety
 * `witness` must be a live handle, `out_json` valid.
 */
enum DiagapStatus diagap_witness_to_json(const struct DiagapWitness *witness, char **out_json);

/**
 * Re-verify a witness from scratch against a form; on success writes the
 * verified epsilon as a `num/den` string.
 *
 * # Safety
 * `form` and `witness` must be live handles, `out_epsilon` valid.
 */
enum DiagapStatus diagap_witness_check(const struct DiagapForm *form,
                                       const struct DiagapWitness *witness,
                                       char **out_epsilon);

/**
 * Release a witness handle.
 *
 * # Safety
 * `witness` must be a pointer from a witness constructor (or null).
 */
void diagap_witness_free(struct DiagapWitness *witness);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIAGAP_H */
