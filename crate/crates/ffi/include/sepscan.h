/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef SEPSCAN_H
#define SEPSCAN_H

#include <stdint.h>
#include <stddef.h>

#define SEPSCAN_ENSEMBLE_REAL 1

#define SEPSCAN_ENSEMBLE_COMPLEX 2

#define SEPSCAN_METRIC_HS 0

#define SEPSCAN_METRIC_BURES 1

#define SEPSCAN_SEQUENCE_LOW_DISCREPANCY 0

#define SEPSCAN_SEQUENCE_PSEUDO_RANDOM 1

typedef enum SepscanStatus {
  SEPSCAN_STATUS_OK = 0,
  SEPSCAN_STATUS_NULL_POINTER = 1,
  SEPSCAN_STATUS_INVALID_INPUT = 2,
  SEPSCAN_STATUS_CONFIG = 3,
  SEPSCAN_STATUS_INFEASIBLE = 4,
  SEPSCAN_STATUS_NUMERICAL = 5,
  SEPSCAN_STATUS_FORMAT = 6,
  SEPSCAN_STATUS_IO = 7,
  SEPSCAN_STATUS_NOT_IMPLEMENTED = 8,
  SEPSCAN_STATUS_PANIC = 9,
} SepscanStatus;

// Opaque curve handle.
typedef struct SepscanCurve SepscanCurve;

// Opaque jump-report handle.
typedef struct SepscanJumpReport SepscanJumpReport;

typedef struct SepscanSamplerConfig {
  // One of the `SEPSCAN_SEQUENCE_*` constants.
  uint32_t sequence;
  uint64_t seed;
  // Worker threads; 0 uses one per core.
  uint32_t workers;
  uint64_t max_rejects;
} SepscanSamplerConfig;

typedef struct SepscanEstimate {
  double estimate;
  double std_error;
  uint64_t samples;
  double effective_samples;
} SepscanEstimate;

typedef struct SepscanCurveBin {
  double c_mid;
  uint64_t n_trials;
  uint64_t n_separable;
  double sigma_hat;
  double std_error;
} SepscanCurveBin;

typedef struct SepscanLinearFit {
  double intercept;
  double slope;
  double intercept_stderr;
  double slope_stderr;
  double weighted_rms_residual;
  uint64_t bins_used;
} SepscanLinearFit;

typedef struct SepscanJump {
  double c_location;
  double robust_z;
  double left_mean;
  double right_mean;
  double relative_change;
} SepscanJump;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// Valid until the next call into this library on the same thread.
const char *sepscan_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *sepscan_version(void);

// Default sampler settings for `seed`.
struct SepscanSamplerConfig sepscan_sampler_config_default(uint64_t seed);

// Maximal concurrence of a descending, unit-sum spectrum.
//
// # Safety
// `lambda` must point to 4 readable doubles and `out` to a writable double.
enum SepscanStatus sepscan_maximal_concurrence(const double *lambda, double *out);

// PPT verdict for a 4×4 density matrix given as row-major real and
// imaginary parts (16 doubles each). `imag` may be null for a real matrix.
//
// # Safety
// `real` (and `imag` if non-null) must point to 16 readable doubles;
// `separable` and `min_eigenvalue` must be writable.
enum SepscanStatus sepscan_is_separable(const double *real,
                                        const double *imag,
                                        int *separable,
                                        double *min_eigenvalue);

// Separability probability by importance-weighted Haar averaging.
//
// # Safety
// `config` must be readable and `out` writable.
enum SepscanStatus sepscan_separability_probability(uint32_t metric_code,
                                                    uint32_t ensemble_code,
                                                    uint64_t n_lambda,
                                                    uint64_t group_samples,
                                                    const struct SepscanSamplerConfig *config,
                                                    struct SepscanEstimate *out);

// Probability of a `C = 0` spectrum.
//
// # Safety
// `config` must be readable and `out` writable.
enum SepscanStatus sepscan_absolute_separability_probability(uint32_t metric_code,
                                                             uint32_t ensemble_code,
                                                             uint64_t n_lambda,
                                                             const struct SepscanSamplerConfig *config,
                                                             struct SepscanEstimate *out);

// Estimates σ̂ on `bins − 1` midpoints. On success `*out` owns a new curve.
//
// # Safety
// `config` must be readable and `out` writable.
enum SepscanStatus sepscan_curve_estimate(uint32_t ensemble_code,
                                          uint64_t bins,
                                          uint64_t spectra_per_bin,
                                          uint64_t group_samples,
                                          const struct SepscanSamplerConfig *config,
                                          struct SepscanCurve **out);

// Reads a curve CSV. On success `*out` owns a new curve.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum SepscanStatus sepscan_curve_read_csv(const char *path, struct SepscanCurve **out);

// Writes a curve as CSV.
//
// # Safety
// `curve` must be a live handle and `path` a NUL-terminated string.
enum SepscanStatus sepscan_curve_write_csv(const struct SepscanCurve *curve, const char *path);

// Number of bins in `curve`; 0 for a null handle.
//
// # Safety
// `curve` must be null or a live handle.
uint64_t sepscan_curve_len(const struct SepscanCurve *curve);

// Copies bin `index` of `curve` into `out`.
//
// # Safety
// `curve` must be a live handle and `out` writable.
enum SepscanStatus sepscan_curve_bin(const struct SepscanCurve *curve,
                                     uint64_t index,
                                     struct SepscanCurveBin *out);

// Releases a curve. Null is ignored.
//
// # Safety
// `curve` must be null or a handle not yet freed.
void sepscan_curve_free(struct SepscanCurve *curve);

// Separability probability with σ̂ read off `curve`.
//
// # Safety
// `curve` must be a live handle, `config` readable and `out` writable.
enum SepscanStatus sepscan_curve_based_probability(const struct SepscanCurve *curve,
                                                   uint32_t metric_code,
                                                   uint32_t ensemble_code,
                                                   uint64_t n_lambda,
                                                   const struct SepscanSamplerConfig *config,
                                                   struct SepscanEstimate *out);

// Weighted linear fit of σ̂ on `[a, b]`, dropping the bins nearest to the
// `n_excluded` values in `excluded`.
//
// # Safety
// `curve` must be a live handle, `excluded` must point to `n_excluded`
// doubles (or be null when `n_excluded` is 0) and `out` must be writable.
enum SepscanStatus sepscan_fit_segment(const struct SepscanCurve *curve,
                                       double a,
                                       double b,
                                       const double *excluded,
                                       uintptr_t n_excluded,
                                       struct SepscanLinearFit *out);

// Robust jump detection. On success `*out` owns a new report.
//
// # Safety
// `curve` must be a live handle and `out` writable.
enum SepscanStatus sepscan_detect_jumps(const struct SepscanCurve *curve,
                                        double z_threshold,
                                        struct SepscanJumpReport **out);

// Number of jumps in `report`; 0 for a null handle.
//
// # Safety
// `report` must be null or a live handle.
uint64_t sepscan_jump_report_len(const struct SepscanJumpReport *report);

// Copies jump `index` of `report` into `out`.
//
// # Safety
// `report` must be a live handle and `out` writable.
enum SepscanStatus sepscan_jump_report_get(const struct SepscanJumpReport *report,
                                           uint64_t index,
                                           struct SepscanJump *out);

// Releases a jump report. Null is ignored.
//
// # Safety
// `report` must be null or a handle not yet freed.
void sepscan_jump_report_free(struct SepscanJumpReport *report);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SEPSCAN_H */
