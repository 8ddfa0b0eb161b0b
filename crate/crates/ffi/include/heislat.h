#ifndef HEISLAT_H
#define HEISLAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HeislatStatus {
  HEISLAT_STATUS_OK = 0,
  HEISLAT_STATUS_NULL_POINTER = 1,
  HEISLAT_STATUS_DOMAIN = 2,
  HEISLAT_STATUS_INVARIANT = 3,
  HEISLAT_STATUS_BUDGET = 4,
  HEISLAT_STATUS_PRECONDITION = 5,
  HEISLAT_STATUS_CONFIG = 6,
  HEISLAT_STATUS_PARSE = 7,
  HEISLAT_STATUS_IO = 8,
  HEISLAT_STATUS_PANIC = 9,
} HeislatStatus;

/**
 * Heisenberg lattice: a unimodular base lattice and a fiber offset.
 */
typedef struct HeislatLattice HeislatLattice;

/**
 * Planar region parsed from the JSON region schema.
 */
typedef struct HeislatRegion HeislatRegion;

/**
 * Haar sampler with its own random stream.
 */
typedef struct HeislatSampler HeislatSampler;

/**
 * Canonical representative `((1, 0), (k, det))` of an orbit of primitive pairs.
 */
typedef struct HeislatOrbitClass {
  int64_t det;
  int64_t m[2];
  int64_t n[2];
  /**
   * `1` for `n = m`, `-1` for `n = -m`, `0` when `det != 0`.
   */
  int8_t sign_tag;
} HeislatOrbitClass;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes of the last error message on this thread, without the
 * terminating NUL.
 */
size_t heislat_last_error_length(void);

/**
 * Copies the last error message into `buf` (at most `len - 1` bytes plus a
 * NUL) and returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t heislat_last_error_message(char *buf, size_t len);

/**
 * New sampler seeded with `seed`. Never returns null.
 */
struct HeislatSampler *heislat_sampler_new(uint64_t seed);

/**
 * Sampler for trial `index` of an experiment with master seed `seed`.
 */
struct HeislatSampler *heislat_sampler_for_trial(uint64_t seed, uint64_t index);

/**
 * # Safety
 * `sampler` must be null or come from a sampler constructor, and not be
 * used afterwards.
 */
void heislat_sampler_free(struct HeislatSampler *sampler);

/**
 * Draws a Haar-random Heisenberg lattice into `*out`.
 *
 * # Safety
 * `sampler` must be a live sampler handle and `out` writable.
 */
enum HeislatStatus heislat_sampler_next_heisenberg(struct HeislatSampler *sampler,
                                                   struct HeislatLattice **out);

/**
 * Draws a Haar-random Euclidean lattice into `*out`, as a Heisenberg
 * lattice with zero fiber.
 *
 * # Safety
 * `sampler` must be a live sampler handle and `out` writable.
 */
enum HeislatStatus heislat_sampler_next_euclidean(struct HeislatSampler *sampler,
                                                  struct HeislatLattice **out);

/**
 * Lattice with base `basis` (4 values, row-major, determinant 1) and fiber
 * coordinate `fiber` (2 values).
 *
 * # Safety
 * `basis` and `fiber` must point to 4 and 2 readable doubles, `out` must be
 * writable.
 */
enum HeislatStatus heislat_lattice_new(const double *basis,
                                       const double *fiber,
                                       struct HeislatLattice **out);

/**
 * # Safety
 * `lattice` must be null or a lattice handle not used afterwards.
 */
void heislat_lattice_free(struct HeislatLattice *lattice);

/**
 * Writes the base basis (4 values, row-major) to `out`.
 *
 * # Safety
 * `lattice` must be a live handle and `out` point to 4 writable doubles.
 */
enum HeislatStatus heislat_lattice_basis(const struct HeislatLattice *lattice, double *out);

/**
 * Writes the fiber coordinate, reduced to `[0, 1)²`, to `out`.
 *
 * # Safety
 * `lattice` must be a live handle and `out` point to 2 writable doubles.
 */
enum HeislatStatus heislat_lattice_fiber(const struct HeislatLattice *lattice, double *out);

/**
 * Parses a region JSON document (NUL-terminated UTF-8).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum HeislatStatus heislat_region_from_json(const char *json, struct HeislatRegion **out);

/**
 * # Safety
 * `region` must be null or a region handle not used afterwards.
 */
void heislat_region_free(struct HeislatRegion *region);

/**
 * Area of the region.
 *
 * # Safety
 * `region` must be a live handle and `out` writable.
 */
enum HeislatStatus heislat_region_measure(const struct HeislatRegion *region, double *out);

/**
 * Number of primitive points of the base lattice inside the region.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum HeislatStatus heislat_theta_euclidean(const struct HeislatLattice *lattice,
                                           const struct HeislatRegion *region,
                                           uint64_t *out);

/**
 * Number of primitive lattice points in the plate `region × [z, z + eps)`.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum HeislatStatus heislat_nil_theta(const struct HeislatLattice *lattice,
                                     const struct HeislatRegion *region,
                                     double z,
                                     double eps,
                                     uint64_t *out);

/**
 * Group law of the Heisenberg group on `(r, s, t)` triples.
 *
 * # Safety
 * `p` and `q` must point to 3 readable doubles, `out` to 3 writable ones.
 */
enum HeislatStatus heislat_h_add(const double *p, const double *q, double *out);

/**
 * Whether the integer point `(m1, m2, k)` is primitive.
 */
bool heislat_is_primitive(int64_t m1, int64_t m2, int64_t k);

/**
 * Closed-form correlation of the primitive vectors `m` and `n`.
 *
 * # Safety
 * `m` and `n` must point to 2 readable integers, `out` must be writable.
 */
enum HeislatStatus heislat_cor_exact(const int64_t *m,
                                     const int64_t *n,
                                     double eps,
                                     double z,
                                     double *out);

/**
 * Canonical orbit representative of the pair `(m, n)`.
 *
 * # Safety
 * `m` and `n` must point to 2 readable integers, `out` must be writable.
 */
enum HeislatStatus heislat_orbit_canonicalize(const int64_t *m,
                                              const int64_t *n,
                                              struct HeislatOrbitClass *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEISLAT_H */
