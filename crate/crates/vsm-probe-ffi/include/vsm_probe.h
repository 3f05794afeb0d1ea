#ifndef VSM_PROBE_H
#define VSM_PROBE_H

/* Generated by cbindgen from vsm-probe-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Number of nations in every national table.
#define VSM_NATION_COUNT 9

// Number of score dimensions per row (PDI, IDV, MAS, UAI, LTO, IVR).
#define VSM_DIMENSION_COUNT 6

// Result code of every fallible call in this interface.
typedef enum VsmStatus {
  VSM_STATUS_OK = 0,
  // A required pointer argument was null.
  VSM_STATUS_NULL_POINTER = 1,
  // An argument was structurally invalid (bad locale, length, id, ...).
  VSM_STATUS_INVALID_ARGUMENT = 2,
  // Numeric input outside its documented domain.
  VSM_STATUS_DOMAIN_ERROR = 3,
  // A metric precondition failed (degenerate input, mismatch, ...).
  VSM_STATUS_METRIC_ERROR = 4,
  // The implementation panicked; state is unchanged.
  VSM_STATUS_INTERNAL_ERROR = 5,
} VsmStatus;

// Opaque handle over a loaded questionnaire bank.
typedef struct VsmQuestionnaire VsmQuestionnaire;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread, or null.
// Valid until the next failing call on the same thread.
const char *vsm_last_error_message(void);

// Library version as a static string; never freed.
const char *vsm_version(void);

// Release a string allocated by this library.
//
// # Safety
// `s` must be a pointer previously returned by a `char*`-returning function
// of this library (or null), not yet freed.
void vsm_string_free(char *s);

// Canonical label of nation `index` (0..9), or null when out of range.
// Caller frees with [`vsm_string_free`].
char *vsm_nation_label(uintptr_t index);

// Copy the bundled 9x6 human reference scores (row-major, canonical nation
// order) into `out`.
//
// # Safety
// `out` must point to at least 54 writable doubles.
enum VsmStatus vsm_human_reference(double *out);

// Score a 24-d mean raw vector into the six dimensions.
//
// `constants` may be null for all-zero additive constants; otherwise it
// points to 6 doubles in dimension order.
//
// # Safety
// `means` must point to 24 readable doubles, `out` to 6 writable doubles,
// and `constants` to 6 readable doubles when non-null.
enum VsmStatus vsm_score_compute(const double *means, const double *constants, double *out);

// Pearson correlation of two equal-length vectors with its two-sided
// p-value. `out_p` may be null when only rho is wanted.
//
// # Safety
// `x` and `y` must point to `len` readable doubles each; `out_rho` must be
// writable; `out_p` must be writable when non-null.
enum VsmStatus vsm_pearson(const double *x,
                           const double *y,
                           uintptr_t len,
                           double *out_rho,
                           double *out_p);

// Pairwise Davies-Bouldin index of two 6-d point clouds (row-major).
//
// # Safety
// `a` must point to `a_len * 6` readable doubles, `b` to `b_len * 6`, and
// `out` to one writable double.
enum VsmStatus vsm_dbi(const double *a,
                       uintptr_t a_len,
                       const double *b,
                       uintptr_t b_len,
                       double *out);

// Pairwise silhouette score of two 6-d point clouds (row-major).
//
// # Safety
// Same layout requirements as [`vsm_dbi`].
enum VsmStatus vsm_silhouette(const double *a,
                              uintptr_t a_len,
                              const double *b,
                              uintptr_t b_len,
                              double *out);

// Per-dimension sample standard deviation and their mean over a 9x6
// national table. `out_sigma` may be null when only the distance is wanted.
//
// # Safety
// `nationals` must point to 54 readable doubles; `out_distance` must be
// writable; `out_sigma` must point to 6 writable doubles when non-null.
enum VsmStatus vsm_dimension_dispersion(const double *nationals,
                                        double *out_sigma,
                                        double *out_distance);

// Model cultural disparity of a 9x6 national table against a human table.
// `human` may be null to use the bundled reference.
//
// # Safety
// `model` must point to 54 readable doubles; `human` likewise when
// non-null; `out` must be writable.
enum VsmStatus vsm_mcd(const double *model, const double *human, double *out);

// Silhouette score with human reference over two 9x6 national tables.
// `human` may be null to use the bundled reference.
//
// # Safety
// `a` and `b` must point to 54 readable doubles each; `human` likewise
// when non-null; `out` must be writable.
enum VsmStatus vsm_ss_h(const double *a, const double *b, const double *human, double *out);

// Parse a raw model reply. Writes the parsed option (0 when unrecognized)
// and the effective score after the neutral-option fallback rules (health
// questions 15/18 and unrecognizable replies both score 3).
//
// # Safety
// `raw_text` must be a valid NUL-terminated string; `out_option` and
// `out_effective` must be writable when non-null.
enum VsmStatus vsm_parse_option(const char *raw_text,
                                uint8_t question_id,
                                int32_t *out_option,
                                int32_t *out_effective);

// Load the bundled questionnaire for a locale tag ("en" or "zh").
//
// # Safety
// `locale_tag` must be a valid NUL-terminated string and `out` a writable
// handle slot. A non-null result must be released with
// [`vsm_questionnaire_close`].
enum VsmStatus vsm_questionnaire_open(const char *locale_tag, struct VsmQuestionnaire **out);

// Release a questionnaire handle.
//
// # Safety
// `handle` must come from [`vsm_questionnaire_open`] (or be null) and must
// not be used afterwards.
void vsm_questionnaire_close(struct VsmQuestionnaire *handle);

// Number of questions in the bank (24).
//
// # Safety
// `handle` must be a live handle from [`vsm_questionnaire_open`].
uintptr_t vsm_questionnaire_len(const struct VsmQuestionnaire *handle);

// Question text by 1-based ID, in the handle's locale. Null when the ID is
// out of range. Caller frees with [`vsm_string_free`].
//
// # Safety
// `handle` must be a live handle from [`vsm_questionnaire_open`].
char *vsm_questionnaire_question_text(const struct VsmQuestionnaire *handle, uint8_t question_id);

// Option text by question ID and option ID. Null when out of range.
// Caller frees with [`vsm_string_free`].
//
// # Safety
// `handle` must be a live handle from [`vsm_questionnaire_open`].
char *vsm_questionnaire_option_text(const struct VsmQuestionnaire *handle,
                                    uint8_t question_id,
                                    uint8_t option_id);

// Whether a question is one of the two health items (always scored 3).
//
// # Safety
// `handle` must be a live handle and `out` writable.
enum VsmStatus vsm_questionnaire_is_health(const struct VsmQuestionnaire *handle,
                                           uint8_t question_id,
                                           bool *out);

// Display order of a question's five options: the identity order when
// `shuffle` is false, otherwise the deterministic seeded permutation.
//
// # Safety
// `handle` must be a live handle and `out_order` must point to 5 writable
// bytes.
enum VsmStatus vsm_questionnaire_presentation(const struct VsmQuestionnaire *handle,
                                              uint8_t question_id,
                                              bool shuffle,
                                              uint64_t seed,
                                              uint8_t *out_order);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VSM_PROBE_H */
