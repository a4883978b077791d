#ifndef WBP_ACTIVE_H
#define WBP_ACTIVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WbpStatus {
  WBP_STATUS_OK = 0,
  WBP_STATUS_NULL_POINTER = 1,
  WBP_STATUS_INVALID_ARGUMENT = 2,
  WBP_STATUS_PARSE = 3,
  WBP_STATUS_IO = 4,
  WBP_STATUS_DIMENSION = 5,
  WBP_STATUS_RUNTIME = 6,
  WBP_STATUS_PANIC = 7,
} WbpStatus;

/**
 * A parity-check code with its Tanner graph.
 */
typedef struct WbpCode WbpCode;

/**
 * Decoder weights for one code and layer count.
 */
typedef struct WbpWeights WbpWeights;

/**
 * Monte Carlo result at one SNR point.
 */
typedef struct WbpErrorStats {
  double snr_db;
  uint64_t blocks;
  uint64_t block_errors;
  uint64_t bit_errors;
  double fer;
  double ber;
  /**
   * Nonzero when the block-error target was reached before the block budget.
   */
  uint8_t converged;
} WbpErrorStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *wbp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wbp_version(void);

/**
 * Parses alist text into a new code handle.
 *
 * # Safety
 * `alist` must be a NUL-terminated string and `out` a valid pointer.
 */
enum WbpStatus wbp_code_from_alist(const char *alist, struct WbpCode **out);

/**
 * Opens a built-in code by name (`hamming_7_4`, `bch_15_7`, ...).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum WbpStatus wbp_code_fixture(const char *name, struct WbpCode **out);

/**
 * # Safety
 * `code` must come from this library and not be used afterwards. NULL is ignored.
 */
void wbp_code_free(struct WbpCode *code);

/**
 * Block length `n`, number of checks `m`, dimension `k`, and edge count.
 * Any output pointer may be NULL.
 *
 * # Safety
 * `code` must be a live handle; non-NULL outputs must be valid.
 */
enum WbpStatus wbp_code_dims(const struct WbpCode *code,
                             size_t *n,
                             size_t *m,
                             size_t *k,
                             size_t *edges);

/**
 * All-ones weights (plain BP) with `layers` iterations.
 *
 * # Safety
 * `code` must be a live handle and `out` a valid pointer.
 */
enum WbpStatus wbp_weights_unit(const struct WbpCode *code, size_t layers, struct WbpWeights **out);

/**
 * Reads a weight file written by the `train` command.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum WbpStatus wbp_weights_load(const char *path, struct WbpWeights **out);

/**
 * # Safety
 * `weights` must be a live handle and `path` a NUL-terminated string.
 */
enum WbpStatus wbp_weights_save(const struct WbpWeights *weights, const char *path);

/**
 * Decoder iterations the weights were built for, or 0 for NULL.
 *
 * # Safety
 * `weights` must be NULL or a live handle.
 */
size_t wbp_weights_layers(const struct WbpWeights *weights);

/**
 * # Safety
 * `weights` must come from this library and not be used afterwards. NULL is ignored.
 */
void wbp_weights_free(struct WbpWeights *weights);

/**
 * Decodes one block of `n` channel LLRs. `soft_out` receives the final-layer
 * estimates of P(bit = 1) and `hard_out` the 0/1 decisions; either may be NULL.
 *
 * # Safety
 * `llr` must point to `n` doubles; non-NULL outputs must have room for `n` values.
 */
enum WbpStatus wbp_decode(const struct WbpCode *code,
                          const struct WbpWeights *weights,
                          const double *llr,
                          size_t n,
                          double clip,
                          double *soft_out,
                          uint8_t *hard_out);

/**
 * Noise standard deviation for Eb/N0 `snr_db` at code rate `rate`.
 *
 * # Safety
 * `sigma` must be a valid pointer.
 */
enum WbpStatus wbp_snr_to_sigma(double snr_db, double rate, double *sigma);

/**
 * All-zero-codeword Monte Carlo at one SNR, stopping at `min_block_errors`
 * or `max_blocks`. Results depend only on the arguments, not on thread count.
 *
 * # Safety
 * `code` and `weights` must be live handles and `stats` a valid pointer.
 */
enum WbpStatus wbp_eval(const struct WbpCode *code,
                        const struct WbpWeights *weights,
                        double clip,
                        double snr_db,
                        uint64_t min_block_errors,
                        uint64_t max_blocks,
                        uint64_t seed,
                        struct WbpErrorStats *stats);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WBP_ACTIVE_H */
