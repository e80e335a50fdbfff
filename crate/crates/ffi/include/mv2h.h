#ifndef MV2H_H
#define MV2H_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Mv2hAlign {
  /**
   * Align with DTW, then match exactly.
   */
  MV2H_ALIGN_AUTO = 0,
  /**
   * Scores share a timeline; match with tolerances.
   */
  MV2H_ALIGN_PRE = 1,
} Mv2hAlign;

/**
 * Status codes returned by every fallible function.
 */
typedef enum Mv2hStatus {
  MV2H_STATUS_OK = 0,
  MV2H_STATUS_NULL_POINTER = 1,
  MV2H_STATUS_INVALID_UTF8 = 2,
  MV2H_STATUS_PARSE_ERROR = 3,
  MV2H_STATUS_ALIGN_ERROR = 4,
  MV2H_STATUS_INVALID_ARGUMENT = 5,
  MV2H_STATUS_PANIC = 6,
} Mv2hStatus;

/**
 * Opaque parsed score.
 */
typedef struct Mv2hScore Mv2hScore;

/**
 * Evaluation settings. Start from [`mv2h_options_default`].
 */
typedef struct Mv2hOptions {
  enum Mv2hAlign align;
  int64_t gap_penalty_numerator;
  int64_t gap_penalty_denominator;
  /**
   * Milliseconds; negative keeps the default. Pre-aligned only.
   */
  int64_t onset_tolerance_ms;
  /**
   * Milliseconds; negative keeps the default. Pre-aligned only.
   */
  int64_t grouping_tolerance_ms;
} Mv2hOptions;

/**
 * Component scores rounded to the nearest double.
 */
typedef struct Mv2hReport {
  double multi_pitch;
  double voice;
  double meter;
  double value;
  double harmony;
  double mv2h;
} Mv2hReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL.
 *
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *mv2h_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mv2h_version(void);

struct Mv2hOptions mv2h_options_default(void);

/**
 * Parse interchange text into a new score handle.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer to
 * writable storage for one handle.
 */
enum Mv2hStatus mv2h_score_from_text(const char *text, struct Mv2hScore **out);

/**
 * Parse an uncompressed partwise MusicXML document into a new score handle.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` to writable storage
 * for one handle.
 */
enum Mv2hStatus mv2h_score_from_musicxml(const uint8_t *data, size_t len, struct Mv2hScore **out);

/**
 * Number of notes in a score; 0 for NULL.
 *
 * # Safety
 * `score` must be NULL or a live handle.
 */
size_t mv2h_score_note_count(const struct Mv2hScore *score);

/**
 * Number of parse warnings recorded for a score; 0 for NULL.
 *
 * # Safety
 * `score` must be NULL or a live handle.
 */
size_t mv2h_score_warning_count(const struct Mv2hScore *score);

/**
 * Release a score handle. NULL is ignored.
 *
 * # Safety
 * `score` must be NULL or a handle not yet freed.
 */
void mv2h_score_free(struct Mv2hScore *score);

/**
 * Evaluate a transcription against a ground truth.
 *
 * `options` may be NULL for the defaults (auto alignment, gap 3/5).
 *
 * # Safety
 * Handles must be live; `options` NULL or valid; `out` valid for writing.
 */
enum Mv2hStatus mv2h_evaluate(const struct Mv2hScore *ground_truth,
                              const struct Mv2hScore *transcription,
                              const struct Mv2hOptions *options,
                              struct Mv2hReport *out);

/**
 * Evaluate and return the report as a flat JSON object. With `exact`,
 * values are `"p/q"` strings instead of 4-decimal numbers.
 *
 * The returned string must be released with [`mv2h_string_free`].
 *
 * # Safety
 * Same as [`mv2h_evaluate`]; `out` must be valid for writing one pointer.
 */
enum Mv2hStatus mv2h_evaluate_json(const struct Mv2hScore *ground_truth,
                                   const struct Mv2hScore *transcription,
                                   const struct Mv2hOptions *options,
                                   bool exact,
                                   char **out);

/**
 * Release a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must be NULL or a string from [`mv2h_evaluate_json`] not yet freed.
 */
void mv2h_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MV2H_H */
