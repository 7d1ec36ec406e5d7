#ifndef WEYL_LAB_H
#define WEYL_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result codes.
 */
typedef enum WlStatus {
  WL_STATUS_OK = 0,
  WL_STATUS_NULL_POINTER = 1,
  WL_STATUS_INVALID_ARGUMENT = 2,
  WL_STATUS_UNSUPPORTED_DIMENSION = 3,
  WL_STATUS_PRECONDITION = 4,
  WL_STATUS_NUMERICAL = 5,
  WL_STATUS_RESOURCE = 6,
  WL_STATUS_BUFFER_TOO_SMALL = 7,
  WL_STATUS_INTERNAL = 8,
} WlStatus;

/**
 * Discretized potential.
 */
typedef struct WlPotential WlPotential;

/**
 * Sorted frequencies and eigenvectors of a truncated operator.
 */
typedef struct WlSpectrum WlSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *wl_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t wl_last_error_message(char *buf, size_t len);

/**
 * `N^0(λ)`: number of free frequencies `sqrt(4π²|k|² + 1) <= λ`.
 *
 * # Safety
 * `out` must point to writable memory for one `u64`.
 */
enum WlStatus wl_count_free(size_t n, double lambda, uint64_t *out);

/**
 * `(2π)^{-n} ω_n λ^n`.
 */
double wl_weyl_main_term(size_t n, double lambda);

/**
 * Samples a potential described by JSON (for example
 * `{"kind":"constant","value":1.0}`) on `grid^n` points and computes its
 * Fourier coefficients up to `fourier_cutoff` (0 skips them).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable handle slot.
 */
enum WlStatus wl_potential_from_json(const char *json,
                                     size_t n,
                                     size_t grid,
                                     size_t fourier_cutoff,
                                     struct WlPotential **out);

/**
 * # Safety
 * `p` must be null or a handle from [`wl_potential_from_json`], not yet destroyed.
 */
void wl_potential_destroy(struct WlPotential *p);

/**
 * Kato functional of the potential at radius `delta`.
 *
 * # Safety
 * `p` must be a live potential handle and `out` writable.
 */
enum WlStatus wl_kato_norm(const struct WlPotential *p, double delta, double *out);

/**
 * Free spectrum on the ball `|k| <= cutoff`.
 *
 * # Safety
 * `out` must be a writable handle slot.
 */
enum WlStatus wl_spectrum_free(size_t n, uint64_t cutoff, struct WlSpectrum **out);

/**
 * Diagonalizes the Galerkin truncation of `−Δ + 1 + V` at radius `cutoff`.
 * The potential needs Fourier data up to `2·cutoff`.
 *
 * # Safety
 * `p` must be a live potential handle and `out` a writable handle slot.
 */
enum WlStatus wl_spectrum_galerkin(const struct WlPotential *p,
                                   uint64_t cutoff,
                                   struct WlSpectrum **out);

/**
 * # Safety
 * `s` must be null or a live spectrum handle.
 */
void wl_spectrum_destroy(struct WlSpectrum *s);

/**
 * Number of eigenvalues, or 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live spectrum handle.
 */
size_t wl_spectrum_dim(const struct WlSpectrum *s);

/**
 * Copies the ascending frequencies into `buf`, which must hold `dim` values.
 *
 * # Safety
 * `s` must be a live spectrum handle and `buf` point to `len` writable doubles.
 */
enum WlStatus wl_spectrum_frequencies(const struct WlSpectrum *s, double *buf, size_t len);

/**
 * `#{k : τ_k <= λ}` and whether `λ` lies in the reliable band.
 *
 * # Safety
 * `s` must be a live spectrum handle; `count` and `reliable` writable.
 */
enum WlStatus wl_spectrum_count(const struct WlSpectrum *s,
                                double lambda,
                                uint64_t *count,
                                bool *reliable);

/**
 * Mollified indicator `1̃_λ(τ)` with window width `width`.
 *
 * # Safety
 * `out` must be writable.
 */
enum WlStatus wl_mollified_indicator(double lambda, double width, double tau, double *out);

/**
 * Both sides of the divided-difference trace identity for `1̃_λ`:
 * `lhs` from the two spectra directly, `rhs` from the double sum.
 *
 * # Safety
 * All handles must be live; `lhs` and `rhs` writable.
 */
enum WlStatus wl_duhamel_sides(const struct WlSpectrum *perturbed,
                               const struct WlSpectrum *free,
                               const struct WlPotential *p,
                               double lambda,
                               double width,
                               double *lhs,
                               double *rhs);

/**
 * Iterates the torus exponent recurrence from `b0`; writes up to `len`
 * iterates into `buf` and the total number of iterates into `written`.
 *
 * # Safety
 * `buf` must point to `len` writable doubles; `written` must be writable.
 */
enum WlStatus wl_bootstrap_torus(size_t n, double b0, double *buf, size_t len, size_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEYL_LAB_H */
