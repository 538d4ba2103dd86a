#ifndef HTARRAY_H
#define HTARRAY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define HT_STATE_X 0

#define HT_STATE_Y 1

#define HT_STATE_SLANT45 2

#define HT_SIDE_FORWARD 0

#define HT_SIDE_BACKWARD 1

// Bits of the `sides` output of [`ht_simulator_run`].
#define HT_BEAM_FORWARD 1

#define HT_BEAM_BACKWARD 2

// Result code of every fallible call.
typedef enum HtStatus {
  HT_STATUS_OK = 0,
  HT_STATUS_NULL_POINTER = 1,
  HT_STATUS_INVALID_ARGUMENT = 2,
  // Config file or curve data could not be read or parsed.
  HT_STATUS_CONFIG = 3,
  // The request is well formed but violates the model (illegal feed,
  // inconsistent geometry, ...).
  HT_STATUS_DOMAIN = 4,
  HT_STATUS_BUFFER_TOO_SMALL = 5,
  HT_STATUS_PANIC = 6,
} HtStatus;

// Opaque run configuration.
typedef struct HtConfig HtConfig;

// Opaque simulator with synthesized cell maps.
typedef struct HtSimulator HtSimulator;

// Beam metrics. Levels in dB relative to the co-polar peak; a component
// that is identically zero reads as negative infinity.
typedef struct HtBeamMetrics {
  double peak_theta_deg;
  double peak_phi_deg;
  double peak_gain_dbi;
  double directivity_dbi;
  double sll_db;
  double beamwidth_3db_deg;
  double crosspol_peak_db;
  double crosspol_at_peak_db;
  double aperture_efficiency;
} HtBeamMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call into this library from the
// same thread.
const char *ht_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ht_version(void);

// Built-in default configuration. Never null.
struct HtConfig *ht_config_default(void);

// Loads a config file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum HtStatus ht_config_load(const char *path, struct HtConfig **out);

// Parses config text; relative curve paths resolve against the working
// directory.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum HtStatus ht_config_parse(const char *text, struct HtConfig **out);

// Overrides the far-field grid steps, degrees.
//
// # Safety
// `config` must come from this library and not be freed.
enum HtStatus ht_config_set_sampling(struct HtConfig *config,
                                     double theta_step_deg,
                                     double phi_step_deg);

// # Safety
// `config` must be null or come from this library, and not be used again.
void ht_config_free(struct HtConfig *config);

// Builds the layout and synthesizes both cell maps.
//
// # Safety
// `config` must come from this library; `out` must be a valid pointer.
enum HtStatus ht_simulator_new(const struct HtConfig *config, struct HtSimulator **out);

// # Safety
// `sim` must be null or come from this library, and not be used again.
void ht_simulator_free(struct HtSimulator *sim);

// Cell counts along x and y of one aperture.
//
// # Safety
// `sim` must come from this library; `nx` and `ny` must be valid pointers.
enum HtStatus ht_simulator_aperture_size(const struct HtSimulator *sim,
                                         uint32_t side,
                                         uintptr_t *nx,
                                         uintptr_t *ny);

// Copies the compensation phases (degrees, `[0, 360)`) of one aperture
// into `buf`, element `(i, j)` at index `i * ny + j`. `len` must be at
// least `nx * ny`.
//
// # Safety
// `sim` must come from this library; `buf` must hold `len` doubles.
enum HtStatus ht_simulator_phase_map(const struct HtSimulator *sim,
                                     uint32_t side,
                                     double *buf,
                                     uintptr_t len);

// Simulates one feed in one state. `sides` receives a mask of
// `HT_BEAM_FORWARD` / `HT_BEAM_BACKWARD`; the matching metrics are
// written to `forward` / `backward` (either may be null if unwanted).
//
// # Safety
// `sim` must come from this library, `feed_id` must be NUL-terminated,
// non-null output pointers must be valid.
enum HtStatus ht_simulator_run(const struct HtSimulator *sim,
                               uint32_t state,
                               const char *feed_id,
                               double frequency_ghz,
                               struct HtBeamMetrics *forward,
                               struct HtBeamMetrics *backward,
                               uint32_t *sides);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HTARRAY_H */
