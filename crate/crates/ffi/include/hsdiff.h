#ifndef HSDIFF_H
#define HSDIFF_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

#define HSD_OK 0

#define HSD_ERR_NULL_POINTER 1

#define HSD_ERR_INVALID_ARGUMENT 2

#define HSD_ERR_CONFIG 3

#define HSD_ERR_NUMERICAL 4

#define HSD_ERR_IO 5

#define HSD_ERR_BUFFER_TOO_SMALL 6

#define HSD_ERR_NOT_FOUND 7

#define HSD_ERR_PANIC 8

// Run configuration.
typedef struct HsdConfig HsdConfig;

// Aggregated ensemble result.
typedef struct HsdSummary HsdSummary;

// One integrated trajectory.
typedef struct HsdTrajectory HsdTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length of the last error message on this thread, including the NUL.
// Copies it into `buf` when `cap` is large enough; returns the length
// either way. An empty message means the last call succeeded.
//
// # Safety
// `buf` must be null or valid for `cap` bytes.
size_t hsd_last_error(char *buf, size_t cap);

// Library version as a static NUL-terminated string.
const char *hsd_version(void);

// New configuration with default values.
//
// # Safety
// `out` must be valid for writes.
int32_t hsd_config_new(struct HsdConfig **out);

// Parses a flat `key = value` configuration document.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be valid for writes.
int32_t hsd_config_parse(const char *text, struct HsdConfig **out);

// Sets one dotted key, e.g. `("params.lambda", "2.0")`. The value is
// parsed with the config-file syntax; the config is left unchanged on
// error.
//
// # Safety
// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
int32_t hsd_config_set(struct HsdConfig *cfg, const char *key, const char *value);

// Serialized configuration text.
//
// # Safety
// `cfg` must be a live handle; `buf` null or valid for `cap` bytes;
// `needed` null or valid for writes.
int32_t hsd_config_to_string(const struct HsdConfig *cfg, char *buf, size_t cap, size_t *needed);

// Hex SHA-256 of the serialized configuration (65 bytes with the NUL).
//
// # Safety
// As for [`hsd_config_to_string`].
int32_t hsd_config_hash(const struct HsdConfig *cfg, char *buf, size_t cap, size_t *needed);

// # Safety
// `cfg` must be null or a handle not yet freed.
void hsd_config_free(struct HsdConfig *cfg);

// Integrates trajectory `index` of the configured run.
//
// # Safety
// `cfg` must be a live handle; `out` valid for writes.
int32_t hsd_trajectory_run(const struct HsdConfig *cfg, size_t index, struct HsdTrajectory **out);

// Number of recorded rows.
//
// # Safety
// `traj` must be a live handle; `len` valid for writes.
int32_t hsd_trajectory_len(const struct HsdTrajectory *traj, size_t *len);

// Copies the named column (`t`, `norm2`, `q_mean`, `p_mean`, `var_q`,
// `var_p`, `gaussian_distance`, ...) into `values`, which must hold
// [`hsd_trajectory_len`] doubles.
//
// # Safety
// `traj` must be a live handle; `name` NUL-terminated; `values` valid for
// `cap` doubles.
int32_t hsd_trajectory_column(const struct HsdTrajectory *traj,
                              const char *name,
                              double *values,
                              size_t cap);

// # Safety
// `traj` must be null or a handle not yet freed.
void hsd_trajectory_free(struct HsdTrajectory *traj);

// Runs the configured ensemble in memory with `workers` threads (0 for
// all cores). Per-trajectory failures are reported inside the summary.
//
// # Safety
// `cfg` must be a live handle; `out` valid for writes.
int32_t hsd_ensemble_run(const struct HsdConfig *cfg, size_t workers, struct HsdSummary **out);

// Number of trajectories that completed.
//
// # Safety
// `summary` must be a live handle; `n` valid for writes.
int32_t hsd_summary_succeeded(const struct HsdSummary *summary, size_t *n);

// Summary as JSON.
//
// # Safety
// As for [`hsd_config_to_string`].
int32_t hsd_summary_json(const struct HsdSummary *summary, char *buf, size_t cap, size_t *needed);

// # Safety
// `summary` must be null or a handle not yet freed.
void hsd_summary_free(struct HsdSummary *summary);

// Width parameter α after time `t` of the width flow from `α0`, using the
// configuration's physical parameters.
//
// # Safety
// `cfg` must be a live handle; `re` and `im` valid for writes.
int32_t hsd_width_flow(const struct HsdConfig *cfg,
                       double alpha0_re,
                       double alpha0_im,
                       double t,
                       double *re,
                       double *im);

// Complex eigenvalue of oscillator mode `n` for the configuration's
// physical parameters.
//
// # Safety
// `cfg` must be a live handle; `re` and `im` valid for writes.
int32_t hsd_mode_eigenvalue(const struct HsdConfig *cfg, size_t n, double *re, double *im);

// Characteristic scales for a body of `mass` kg as JSON.
//
// # Safety
// `buf` null or valid for `cap` bytes; `needed` null or valid for writes.
int32_t hsd_regimes_json(double mass, char *buf, size_t cap, size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HSDIFF_H */
