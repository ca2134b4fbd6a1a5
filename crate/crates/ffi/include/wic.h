#ifndef WIC_H
#define WIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum WicStatus {
  WIC_STATUS_OK = 0,
  WIC_STATUS_NULL_POINTER = 1,
  WIC_STATUS_INVALID_UTF8 = 2,
  WIC_STATUS_IO = 3,
  /**
   * Not a checkpoint, or an unsupported version.
   */
  WIC_STATUS_FORMAT = 4,
  /**
   * Truncated or damaged checkpoint.
   */
  WIC_STATUS_CORRUPT = 5,
  WIC_STATUS_INVALID_ARGUMENT = 6,
  /**
   * The output buffer is too short; the required length was written.
   */
  WIC_STATUS_BUFFER_TOO_SMALL = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  WIC_STATUS_PANIC = 8,
} WicStatus;

/**
 * Loaded checkpoint.
 */
typedef struct WicModel WicModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads a checkpoint file. On success `*out` owns a handle that must be
 * released with [`wic_model_free`].
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum WicStatus wic_model_load(const char *path, struct WicModel **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `model` must come from [`wic_model_load`] and not be used afterwards.
 */
void wic_model_free(struct WicModel *model);

/**
 * Width of the context vectors.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
size_t wic_model_context_dim(const struct WicModel *model);

/**
 * Number of labels of the output head.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
size_t wic_model_num_labels(const struct WicModel *model);

/**
 * Context vector of the token at `position` of a whitespace-tokenized
 * sentence.
 *
 * # Safety
 * `sentence` must be NUL-terminated; `out` must hold `out_len` doubles.
 */
enum WicStatus wic_model_encode(const struct WicModel *model,
                                const char *sentence,
                                size_t position,
                                double *out,
                                size_t out_len,
                                size_t *written);

/**
 * Output-head distribution for the token at `position`.
 *
 * # Safety
 * As for [`wic_model_encode`].
 */
enum WicStatus wic_model_label_distribution(const struct WicModel *model,
                                            const char *sentence,
                                            size_t position,
                                            double *out,
                                            size_t out_len,
                                            size_t *written);

/**
 * Probability of translating the token at `position` as `target_word`.
 * `*target_oov` is set to 1 when the word is out of vocabulary, in which
 * case the unknown token's probability is returned.
 *
 * # Safety
 * String arguments must be NUL-terminated; `prob` must be valid;
 * `target_oov` may be null.
 */
enum WicStatus wic_model_translation_prob(const struct WicModel *model,
                                          const char *sentence,
                                          size_t position,
                                          const char *target_word,
                                          double *prob,
                                          int32_t *target_oov);

/**
 * Message for the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next call on this thread.
 */
const char *wic_last_error_message(void);

/**
 * Library version, NUL-terminated and static.
 */
const char *wic_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WIC_H */
