#ifndef CQPOLAR_H
#define CQPOLAR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CqpStatus {
  CQP_STATUS_OK = 0,
  CQP_STATUS_OTHER = 1,
  CQP_STATUS_PARSE = 2,
  CQP_STATUS_GUARD = 3,
  CQP_STATUS_INVARIANT = 4,
  CQP_STATUS_NULL_POINTER = 5,
  CQP_STATUS_PANIC = 6,
} CqpStatus;

/**
 * Measurement used by [`cqp_exact_error`].
 */
typedef enum CqpVariant {
  CQP_VARIANT_HELSTROM = 0,
  CQP_VARIANT_SQRT_HELSTROM = 1,
  CQP_VARIANT_FUCHS_CAVES = 2,
  CQP_VARIANT_HYBRID = 3,
} CqpVariant;

/**
 * Opaque binary-input channel with density-operator outputs.
 */
typedef struct CqpChannel CqpChannel;

/**
 * Opaque per-index report at one (N, β).
 */
typedef struct CqpReport CqpReport;

/**
 * One row of a report.
 */
typedef struct CqpIndexRecord {
  size_t index;
  double fidelity;
  double holevo;
  double z_fc;
  double z_hel;
  bool good_w;
  bool good_wfc;
} CqpIndexRecord;

/**
 * Closed-form BPSK quantities at one energy.
 */
typedef struct CqpBpskPoint {
  double energy;
  double chi;
  double i_hel;
  double fraction;
  double g_capacity;
} CqpBpskPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread, NUL-terminated, into `buf`
 * (truncated to `len` bytes) and returns the full message length without the
 * terminator. `buf` may be null to query the length.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t cqp_last_error(char *buf, size_t len);

/**
 * Builds a channel from two row-major `dim` × `dim` matrices. The imaginary
 * parts may be null for real matrices.
 *
 * # Safety
 * Non-null pointers must be valid for `dim * dim` doubles; `out` must be
 * valid for one pointer write.
 */
enum CqpStatus cqp_channel_new(size_t dim,
                               const double *rho0_re,
                               const double *rho0_im,
                               const double *rho1_re,
                               const double *rho1_im,
                               struct CqpChannel **out);

/**
 * The coherent-state pair |±α⟩ with mean photon number `energy`.
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
enum CqpStatus cqp_channel_new_bpsk(double energy, struct CqpChannel **out);

/**
 * # Safety
 * `ch` must be null or a handle from `cqp_channel_new*` not yet freed.
 */
void cqp_channel_free(struct CqpChannel *ch);

/**
 * # Safety
 * `ch` must be a live channel handle.
 */
size_t cqp_channel_dim(const struct CqpChannel *ch);

/**
 * Symmetric Holevo information in bits.
 *
 * # Safety
 * `ch` must be a live channel handle and `out` valid for one write.
 */
enum CqpStatus cqp_holevo(const struct CqpChannel *ch, double *out);

/**
 * Fidelity F = ‖√ρ0 √ρ1‖₁.
 *
 * # Safety
 * `ch` must be a live channel handle and `out` valid for one write.
 */
enum CqpStatus cqp_fidelity(const struct CqpChannel *ch, double *out);

/**
 * Bhattacharyya parameter of the channel induced by the Fuchs-Caves
 * measurement.
 *
 * # Safety
 * `ch` must be a live channel handle and `out` valid for one write.
 */
enum CqpStatus cqp_fc_bhattacharyya(const struct CqpChannel *ch, double *out);

/**
 * Error probabilities of the Helstrom and Fuchs-Caves decisions.
 *
 * # Safety
 * `ch` must be a live channel handle; outputs valid for one write each.
 */
enum CqpStatus cqp_error_probabilities(const struct CqpChannel *ch,
                                       double *helstrom,
                                       double *fuchs_caves);

/**
 * Synthesizes all N channels and classifies them at threshold 2^(−N^β).
 *
 * # Safety
 * `ch` must be a live channel handle and `out` valid for one pointer write.
 */
enum CqpStatus cqp_report_new(const struct CqpChannel *ch,
                              size_t n,
                              double beta,
                              struct CqpReport **out);

/**
 * # Safety
 * `r` must be null or a handle from `cqp_report_new` not yet freed.
 */
void cqp_report_free(struct CqpReport *r);

/**
 * Number of rows (N).
 *
 * # Safety
 * `r` must be a live report handle.
 */
size_t cqp_report_len(const struct CqpReport *r);

/**
 * Row for the 1-based index `i`.
 *
 * # Safety
 * `r` must be a live report handle and `out` valid for one write.
 */
enum CqpStatus cqp_report_get(const struct CqpReport *r, size_t i, struct CqpIndexRecord *out);

/**
 * Exact block error of successive-cancellation decoding with all frozen bits
 * zero. `info_set` holds `k` 1-based indices; `beta` is read only by the
 * hybrid variant.
 *
 * # Safety
 * `ch` must be a live channel handle, `info_set` valid for `k` reads (or
 * null when `k` = 0) and `out` valid for one write.
 */
enum CqpStatus cqp_exact_error(const struct CqpChannel *ch,
                               size_t n,
                               const size_t *info_set,
                               size_t k,
                               enum CqpVariant variant,
                               double beta,
                               double *out);

/**
 * χ, I_Hel, collective fraction and g(E) of BPSK at energy `energy` > 0.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum CqpStatus cqp_bpsk_point(double energy, struct CqpBpskPoint *out);

/**
 * Library version, a static NUL-terminated string.
 */
const char *cqp_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CQPOLAR_H */
