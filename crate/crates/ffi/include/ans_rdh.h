#ifndef ANS_RDH_H
#define ANS_RDH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define ARDH_MODE_STATIC 0

#define ARDH_MODE_DYNAMIC 1

// Status codes returned by every fallible function.
typedef enum ArdhStatus {
  ARDH_STATUS_OK = 0,
  ARDH_STATUS_NULL_POINTER = 1,
  ARDH_STATUS_INVALID_ARGUMENT = 2,
  ARDH_STATUS_INVALID_PARAMS = 3,
  ARDH_STATUS_BIT_IO = 4,
  ARDH_STATUS_ZERO_FREQUENCY = 5,
  ARDH_STATUS_INVALID_TABLE = 6,
  ARDH_STATUS_INFEASIBLE = 7,
  ARDH_STATUS_INVALID_DISTRIBUTION = 8,
  ARDH_STATUS_DESYNC = 9,
  ARDH_STATUS_DIMENSION_MISMATCH = 10,
  ARDH_STATUS_FORMAT = 11,
  ARDH_STATUS_IO = 12,
  ARDH_STATUS_PANIC = 13,
} ArdhStatus;

// Stego symbols and the serialized sidecar.
typedef struct ArdhEmbedding ArdhEmbedding;

// Recovered host symbols and message.
typedef struct ArdhRecovered ArdhRecovered;

// Embedding knobs. Start from [`ardh_options_default`].
typedef struct ArdhOptions {
  // Tradeoff, `>= 1`; `INFINITY` embeds nothing.
  double alpha;
  // Optimizer tolerance.
  double epsilon;
  // State exponent `T`.
  uint32_t state_bits;
  // Slot width `n`.
  uint32_t slot_bits;
  // Renormalization multiplier `v`.
  uint32_t renorm_mult;
} ArdhOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// `T = 16`, `n = 16`, `v = 1`, `alpha = 1.001`, `epsilon = 1e-9`.
struct ArdhOptions ardh_options_default(void);

// Hides `msg` (bytes, most significant bit first) in a raw 8-bit sequence.
// `opts` may be null for defaults. On success `*out` owns a new handle.
//
// # Safety
// Pointers must be valid for the given lengths; `out` must be writable.
enum ArdhStatus ardh_embed_raw(const uint8_t *host,
                               size_t host_len,
                               const uint8_t *msg,
                               size_t msg_len,
                               uint32_t mode,
                               const struct ArdhOptions *opts,
                               struct ArdhEmbedding **out);

// Hides `msg` in a row-major 8-bit gray-scale raster of `width * height`
// pixels. The stego buffer has the same layout.
//
// # Safety
// Pointers must be valid for the given sizes; `out` must be writable.
enum ArdhStatus ardh_embed_image(const uint8_t *pixels,
                                 uint32_t width,
                                 uint32_t height,
                                 const uint8_t *msg,
                                 size_t msg_len,
                                 uint32_t mode,
                                 const struct ArdhOptions *opts,
                                 struct ArdhEmbedding **out);

// Borrows the stego symbols.
//
// # Safety
// `e` must be a live handle; `data` and `len` must be writable.
enum ArdhStatus ardh_embedding_stego(const struct ArdhEmbedding *e,
                                     const uint8_t **data,
                                     size_t *len);

// Borrows the serialized sidecar.
//
// # Safety
// `e` must be a live handle; `data` and `len` must be writable.
enum ArdhStatus ardh_embedding_sidecar(const struct ArdhEmbedding *e,
                                       const uint8_t **data,
                                       size_t *len);

// Net embedded bits: message bits drawn plus padding, minus the bits the
// sidecar has to carry back. Zero for a null handle.
//
// # Safety
// `e` must be null or a live handle.
int64_t ardh_embedding_net_bits(const struct ArdhEmbedding *e);

// Message bits consumed; extraction returns exactly this prefix.
//
// # Safety
// `e` must be null or a live handle.
uint64_t ardh_embedding_message_bits(const struct ArdhEmbedding *e);

// Releases a handle from `ardh_embed_*`. Null is ignored.
//
// # Safety
// `e` must be null or a handle not yet freed.
void ardh_embedding_free(struct ArdhEmbedding *e);

// Recovers host symbols and message from stego symbols plus the sidecar
// bytes produced at embedding time.
//
// # Safety
// Pointers must be valid for the given lengths; `out` must be writable.
enum ArdhStatus ardh_extract(const uint8_t *stego,
                             size_t stego_len,
                             const uint8_t *sidecar,
                             size_t sidecar_len,
                             struct ArdhRecovered **out);

// Borrows the recovered host symbols.
//
// # Safety
// `r` must be a live handle; `data` and `len` must be writable.
enum ArdhStatus ardh_recovered_host(const struct ArdhRecovered *r,
                                    const uint8_t **data,
                                    size_t *len);

// Borrows the recovered message, packed most significant bit first; the
// last byte is zero-filled when the bit count is not a multiple of 8.
//
// # Safety
// `r` must be a live handle; all output pointers must be writable.
enum ArdhStatus ardh_recovered_message(const struct ArdhRecovered *r,
                                       const uint8_t **data,
                                       size_t *len,
                                       uint64_t *bits);

// Releases a handle from [`ardh_extract`]. Null is ignored.
//
// # Safety
// `r` must be null or a handle not yet freed.
void ardh_recovered_free(struct ArdhRecovered *r);

// Description of the last failure on this thread; empty after a success.
// The string lives until the next call into this library on the thread.
const char *ardh_last_error_message(void);

// Static name of a status code.
const char *ardh_status_name(enum ArdhStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANS_RDH_H */
