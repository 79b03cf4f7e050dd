#ifndef SEMIPERM_H
#define SEMIPERM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum {
  SEMIPERM_STATUS_OK = 0,
  SEMIPERM_STATUS_NULL_POINTER = 1,
  SEMIPERM_STATUS_INVALID_ARGUMENT = 2,
  SEMIPERM_STATUS_INVALID_MODEL = 3,
  SEMIPERM_STATUS_RESOURCE_LIMIT = 4,
  SEMIPERM_STATUS_INSUFFICIENT_TERMS = 5,
  SEMIPERM_STATUS_PARSE = 6,
  SEMIPERM_STATUS_IO = 7,
  SEMIPERM_STATUS_UNSUPPORTED = 8,
  /**
   * An index past the end of a sequence, or a value of the wrong storage.
   */
  SEMIPERM_STATUS_OUT_OF_RANGE = 9,
  SEMIPERM_STATUS_INTERNAL = 10,
} SemipermStatus;

/**
 * Storage of enumerated counts.
 */
typedef enum {
  SEMIPERM_STORAGE_EXACT = 0,
  /**
   * Residues modulo the prime given alongside.
   */
  SEMIPERM_STORAGE_MODULAR = 1,
  /**
   * Natural logarithms from a floating-point run.
   */
  SEMIPERM_STORAGE_LOG = 2,
} SemipermStorage;

typedef enum {
  SEMIPERM_KIND_TOTALS = 0,
  SEMIPERM_KIND_RETURNS = 1,
} SemipermKind;

/**
 * A walk model.
 */
typedef struct SemipermModel SemipermModel;

/**
 * A cached sequence of walk counts.
 */
typedef struct SemipermTerms SemipermTerms;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread; empty after a
 * success. Owned by the library and valid until the next call.
 */
const char *semiperm_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void semiperm_string_free(char *s);

/**
 * Looks up a catalog model (`S2`, `S3`, `S4a`, `S4b`, `S5`, `QP`, `TQP`).
 *
 * # Safety
 * `id` must be a nul-terminated string and `out` a valid pointer.
 */
SemipermStatus semiperm_model_catalog(const char *id, SemipermModel **out);

/**
 * Parses a model from its JSON description.
 *
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
SemipermStatus semiperm_model_from_json(const char *json, SemipermModel **out);

/**
 * JSON description of a model.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
SemipermStatus semiperm_model_to_json(const SemipermModel *model, char **out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void semiperm_model_free(SemipermModel *model);

/**
 * Counts walks of lengths `0..=order`. `prime` is read only for modular
 * storage.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
SemipermStatus semiperm_enumerate(const SemipermModel *model,
                                  uintptr_t order,
                                  SemipermStorage storage,
                                  uint32_t prime,
                                  SemipermKind kind,
                                  SemipermTerms **out);

/**
 * Reads a term cache file.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid pointer.
 */
SemipermStatus semiperm_terms_load(const char *path, SemipermTerms **out);

/**
 * Writes a term cache file.
 *
 * # Safety
 * `terms` must be a live handle and `path` a nul-terminated string.
 */
SemipermStatus semiperm_terms_save(const SemipermTerms *terms, const char *path);

/**
 * Number of stored terms, or 0 for a null handle.
 *
 * # Safety
 * `terms` must be null or a live handle.
 */
uintptr_t semiperm_terms_len(const SemipermTerms *terms);

/**
 * Decimal text of an exact term.
 *
 * # Safety
 * `terms` must be a live handle and `out` a valid pointer.
 */
SemipermStatus semiperm_terms_get_decimal(const SemipermTerms *terms, uintptr_t index, char **out);

/**
 * A term reduced modulo `prime`; not available for log storage.
 *
 * # Safety
 * `terms` must be a live handle and `out` a valid pointer.
 */
SemipermStatus semiperm_terms_get_mod(const SemipermTerms *terms,
                                      uintptr_t index,
                                      uint32_t prime,
                                      uint32_t *out);

/**
 * Natural log of a term; `-inf` for a zero count.
 *
 * # Safety
 * `terms` must be a live handle and `out` a valid pointer.
 */
SemipermStatus semiperm_terms_get_log(const SemipermTerms *terms, uintptr_t index, double *out);

/**
 * # Safety
 * `terms` must be null or a handle not yet freed.
 */
void semiperm_terms_free(SemipermTerms *terms);

/**
 * Runs a named check (`kernel-q`, `s2-forms`, `s3-form`, `star`,
 * `x0-identity`, `feq`, `orbit`) through `t^order` with default options.
 * `passed` receives 1 or 0; `report` receives the one-line outcome and may
 * be null.
 *
 * # Safety
 * `name` must be a nul-terminated string and `passed` a valid pointer;
 * `report` must be null or valid.
 */
SemipermStatus semiperm_check(const char *name, uintptr_t order, int32_t *passed, char **report);

/**
 * Recurrence search over shapes with `(r+1)(d+1) <= budget`; writes the
 * report as JSON. Exact terms are reduced modulo `prime`.
 *
 * # Safety
 * `terms` must be a live handle and `out` a valid pointer.
 */
SemipermStatus semiperm_guess_json(const SemipermTerms *terms,
                                   uint32_t prime,
                                   uintptr_t budget,
                                   double holdout,
                                   char **out);

/**
 * Fits `c mu^n n^alpha` and writes the fit as JSON. Return counts are
 * fitted on their even terms.
 *
 * # Safety
 * `terms` must be a live handle and `out` a valid pointer.
 */
SemipermStatus semiperm_asymptotics_json(const SemipermTerms *terms,
                                         SemipermKind kind,
                                         uintptr_t depth,
                                         char **out);

/**
 * Library version as a static string.
 */
const char *semiperm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMIPERM_H */
