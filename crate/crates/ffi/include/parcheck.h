#ifndef PARCHECK_H
#define PARCHECK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum PcStatus {
  PC_STATUS_OK = 0,
  /**
   * Every check ran and at least one failed.
   */
  PC_STATUS_CHECK_FAILED = 1,
  /**
   * The source did not parse or bind.
   */
  PC_STATUS_DIAGNOSTICS = 2,
  PC_STATUS_IO = 3,
  PC_STATUS_NULL_POINTER = 4,
  PC_STATUS_INVALID_UTF8 = 5,
  PC_STATUS_OUT_OF_RANGE = 6,
  PC_STATUS_PANIC = 7,
} PcStatus;

/**
 * Compiled checks of one `.grs` document.
 */
typedef struct PcDocument PcDocument;

/**
 * Results of running a document.
 */
typedef struct PcReport PcReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Compiles `.grs` source text into `*out`.
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PcStatus pc_document_compile(const char *source, struct PcDocument **out);

/**
 * Reads and compiles the `.grs` file at `path` into `*out`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PcStatus pc_document_open(const char *path, struct PcDocument **out);

/**
 * Number of checks in a document; 0 for null.
 *
 * # Safety
 * `doc` must be null or a live document handle.
 */
size_t pc_document_check_count(const struct PcDocument *doc);

/**
 * # Safety
 * `doc` must be null or a handle not yet freed.
 */
void pc_document_free(struct PcDocument *doc);

/**
 * Runs every check of `doc` into `*out`.
 *
 * `tol` overrides checks without an explicit tolerance when positive; `points`
 * and `seed` override random sample sets when nonzero. Returns `PC_STATUS_OK`
 * when all checks pass and `PC_STATUS_CHECK_FAILED` otherwise; the report is
 * produced in both cases.
 *
 * # Safety
 * `doc` must be a live document handle and `out` a valid pointer.
 */
enum PcStatus pc_run(const struct PcDocument *doc,
                     double tol,
                     size_t points,
                     uint64_t seed,
                     struct PcReport **out);

/**
 * Number of checks in a report; 0 for null.
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
size_t pc_report_check_count(const struct PcReport *report);

/**
 * Whether check `index` passed, written to `*pass`.
 *
 * # Safety
 * `report` must be a live report handle and `pass` a valid pointer.
 */
enum PcStatus pc_report_check_pass(const struct PcReport *report, size_t index, bool *pass);

/**
 * Largest residual of check `index` over all labels, written to `*linf`.
 *
 * # Safety
 * `report` must be a live report handle and `linf` a valid pointer.
 */
enum PcStatus pc_report_check_linf(const struct PcReport *report, size_t index, double *linf);

/**
 * The JSON report as a new string; free it with [`pc_string_free`]. Null on error.
 *
 * # Safety
 * `report` must be null or a live report handle.
 */
char *pc_report_json(const struct PcReport *report);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void pc_report_free(struct PcReport *report);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void pc_string_free(char *s);

/**
 * Message for the last failing call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *pc_last_error(void);

/**
 * Library version as a static string.
 */
const char *pc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PARCHECK_H */
