#ifndef SPINESCAN_H
#define SPINESCAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Scan-level label codes.
 */
#define SS_LABEL_NORMAL 0

#define SS_LABEL_ABNORMAL 1

/**
 * Returned by [`ss_report_label`] when classification did not run.
 */
#define SS_LABEL_NONE -1

typedef enum SsStatus {
  SS_STATUS_OK = 0,
  /**
   * Null pointer, bad length or non-UTF-8 string.
   */
  SS_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Malformed DICOM, NIfTI or JSON input.
   */
  SS_STATUS_PARSE = 2,
  /**
   * Well-formed input that fails a semantic check.
   */
  SS_STATUS_VALIDATION = 3,
  SS_STATUS_IO = 4,
  /**
   * A pipeline stage failed.
   */
  SS_STATUS_PIPELINE = 5,
  /**
   * Index past the end of a collection.
   */
  SS_STATUS_OUT_OF_RANGE = 6,
  /**
   * Internal panic caught at the boundary.
   */
  SS_STATUS_PANIC = 7,
} SsStatus;

/**
 * Opaque pipeline configuration handle.
 */
typedef struct SsConfig SsConfig;

/**
 * Opaque per-scan report handle.
 */
typedef struct SsReport SsReport;

/**
 * Opaque volume handle.
 */
typedef struct SsVolume SsVolume;

/**
 * One detection, flattened.
 */
typedef struct SsDetection {
  uint32_t slice_index;
  double x1;
  double y1;
  double x2;
  double y2;
  /**
   * Pathology code, a 0-based index into the label vocabulary.
   */
  uint32_t label_code;
  double score;
  /**
   * Cascade stage that produced the box.
   */
  uint32_t stage;
} SsDetection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null after a
 * success. Valid until the next call on the same thread.
 */
const char *ss_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ss_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void ss_string_free(char *s);

/**
 * Decodes a single-file NIfTI-1 image held in memory.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes; `out` must be writable.
 */
enum SsStatus ss_volume_from_nifti(const uint8_t *bytes, size_t len, struct SsVolume **out_volume);

/**
 * Assembles a volume from `count` DICOM slice files of one series.
 *
 * # Safety
 * `paths` must point to `count` NUL-terminated strings; `out` must be
 * writable.
 */
enum SsStatus ss_volume_from_dicom_files(const char *const *paths,
                                         size_t count,
                                         struct SsVolume **out_volume);

/**
 * Generates a synthetic sagittal phantom.
 *
 * # Safety
 * `out_volume` must be writable.
 */
enum SsStatus ss_volume_phantom(uint64_t seed, bool abnormal, struct SsVolume **out_volume);

/**
 * Writes the volume dimensions (x, y, z) to `out_dims[0..3]`.
 *
 * # Safety
 * `volume` must be a live handle; `out_dims` must hold 3 values.
 */
enum SsStatus ss_volume_dims(const struct SsVolume *volume, size_t *out_dims);

/**
 * Writes the voxel spacing in mm to `out_spacing[0..3]`.
 *
 * # Safety
 * `volume` must be a live handle; `out_spacing` must hold 3 values.
 */
enum SsStatus ss_volume_spacing(const struct SsVolume *volume, double *out_spacing);

/**
 * Copies voxels (x fastest) into `buffer`, which must hold `capacity`
 * values; fails with `OutOfRange` when it is too small.
 *
 * # Safety
 * `volume` must be a live handle; `buffer` must hold `capacity` floats.
 */
enum SsStatus ss_volume_voxels(const struct SsVolume *volume, float *buffer, size_t capacity);

/**
 * Encodes the volume as float32 NIfTI-1. Release with [`ss_bytes_free`].
 *
 * # Safety
 * `volume` must be a live handle; the out pointers must be writable.
 */
enum SsStatus ss_volume_to_nifti(const struct SsVolume *volume,
                                 uint8_t **out_bytes,
                                 size_t *out_len);

/**
 * Releases a buffer from [`ss_volume_to_nifti`]. Null is ignored.
 *
 * # Safety
 * `bytes`/`len` must be exactly as returned and not yet freed.
 */
void ss_bytes_free(uint8_t *bytes, size_t len);

/**
 * # Safety
 * `volume` must be null or a live handle.
 */
void ss_volume_free(struct SsVolume *volume);

/**
 * Default pipeline configuration.
 *
 * # Safety
 * `out_config` must be writable.
 */
enum SsStatus ss_config_default(struct SsConfig **out_config);

/**
 * Parses a strict JSON configuration (unknown keys are rejected).
 *
 * # Safety
 * `json` must be NUL-terminated; `out_config` must be writable.
 */
enum SsStatus ss_config_from_json(const char *json, struct SsConfig **out_config);

/**
 * Effective configuration as pretty JSON. Release with [`ss_string_free`].
 *
 * # Safety
 * `config` must be a live handle; `out_json` must be writable.
 */
enum SsStatus ss_config_to_json(const struct SsConfig *config, char **out_json);

/**
 * # Safety
 * `config` must be null or a live handle.
 */
void ss_config_free(struct SsConfig *config);

/**
 * Runs verification, classification, segmentation and detection on one
 * scan.
 *
 * # Safety
 * Handles must be live; `scan_id` NUL-terminated; `out_report` writable.
 */
enum SsStatus ss_process_scan(const struct SsConfig *config,
                              const struct SsVolume *volume,
                              const char *scan_id,
                              struct SsReport **out_report);

/**
 * Scan label (`SS_LABEL_*`) and weighted abnormal probability. The
 * probability is NaN when classification did not run.
 *
 * # Safety
 * `report` must be a live handle; out pointers writable.
 */
enum SsStatus ss_report_label(const struct SsReport *report,
                              int32_t *out_label,
                              double *out_probability);

/**
 * # Safety
 * `report` must be a live handle; `out_count` writable.
 */
enum SsStatus ss_report_detection_count(const struct SsReport *report, size_t *out_count);

/**
 * # Safety
 * `report` must be a live handle; `out_detection` writable.
 */
enum SsStatus ss_report_detection(const struct SsReport *report,
                                  size_t index,
                                  struct SsDetection *out_detection);

/**
 * Full report as compact JSON. Release with [`ss_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out_json` writable.
 */
enum SsStatus ss_report_to_json(const struct SsReport *report, char **out_json);

/**
 * # Safety
 * `report` must be null or a live handle.
 */
void ss_report_free(struct SsReport *report);

/**
 * Wilson score interval for `k` successes in `n` trials.
 *
 * # Safety
 * Out pointers must be writable.
 */
enum SsStatus ss_wilson_ci(uint64_t k, uint64_t n, double z, double *out_lo, double *out_hi);

/**
 * ROC-AUC of `scores` against 0/1 `labels` (nonzero = positive).
 *
 * # Safety
 * `scores` and `labels` must each hold `len` values; `out_auc` writable.
 */
enum SsStatus ss_roc_auc(const double *scores, const uint8_t *labels, size_t len, double *out_auc);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINESCAN_H */
