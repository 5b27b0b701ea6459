#ifndef ONCONER_H
#define ONCONER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Zero is success.
 */
typedef enum OncStatus {
  ONC_STATUS_OK = 0,
  ONC_STATUS_NULL_POINTER = 1,
  ONC_STATUS_INVALID_UTF8 = 2,
  ONC_STATUS_IO = 3,
  ONC_STATUS_INVALID_INPUT = 4,
  ONC_STATUS_MODEL = 5,
  ONC_STATUS_PANIC = 6,
} OncStatus;

/**
 * Opaque model handle: a checkpoint with its vocabulary.
 */
typedef struct OncModel OncModel;

/**
 * Opaque vocabulary handle.
 */
typedef struct OncVocab OncVocab;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next failing call on the same thread; do not free.
 */
const char *onc_last_error(void);

/**
 * Library version as a static string; do not free.
 */
const char *onc_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void onc_string_free(char *s);

/**
 * The built-in base vocabulary.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum OncStatus onc_vocab_builtin(struct OncVocab **out);

/**
 * Loads a one-token-per-line vocabulary file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid pointer.
 */
enum OncStatus onc_vocab_load(const char *path, struct OncVocab **out);

/**
 * # Safety
 * `v` must be null or a handle from this library, not freed already.
 */
void onc_vocab_free(struct OncVocab *v);

/**
 * # Safety
 * `v` must be a live handle and `out` a valid pointer.
 */
enum OncStatus onc_vocab_len(const struct OncVocab *v, size_t *out);

/**
 * Tokenizes `text`; writes `{"pieces":[...],"ids":[...],"offsets":[[s,e],...]}`.
 * Offsets are character positions in `text`.
 *
 * # Safety
 * `v` must be a live handle, `text` NUL-terminated, `out` valid.
 */
enum OncStatus onc_tokenize_json(const struct OncVocab *v, const char *text, char **out);

/**
 * Loads a checkpoint and pairs it with a copy of `vocab`. Fails when the
 * checkpoint was trained against a different vocabulary.
 *
 * # Safety
 * `path` NUL-terminated, `vocab` a live handle, `out` valid.
 */
enum OncStatus onc_model_load(const char *path,
                              const struct OncVocab *vocab,
                              struct OncModel **out);

/**
 * # Safety
 * `m` must be null or a handle from this library, not freed already.
 */
void onc_model_free(struct OncModel *m);

/**
 * Predicts entity spans; writes a JSON array of
 * `{"start":s,"end":e,"label":"..."}` with character offsets.
 * `max_len` 0 means the model's position limit.
 *
 * # Safety
 * `m` a live handle, `text` NUL-terminated, `out` valid.
 */
enum OncStatus onc_predict_json(const struct OncModel *m,
                                const char *text,
                                size_t max_len,
                                char **out);

/**
 * Scores two JSONL corpora given as strings; writes the exact and
 * lenient report as JSON.
 *
 * # Safety
 * Both inputs NUL-terminated, `out` valid.
 */
enum OncStatus onc_score_json(const char *gold_jsonl, const char *pred_jsonl, char **out);

/**
 * Cohen's kappa between two label sequences of length `n`.
 *
 * # Safety
 * `a` and `b` must point to `n` readable values; `out` valid.
 */
enum OncStatus onc_cohen_kappa(const int32_t *a, const int32_t *b, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONCONER_H */
