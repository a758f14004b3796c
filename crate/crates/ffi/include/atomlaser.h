#ifndef ATOMLASER_H
#define ATOMLASER_H

#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AlStatus {
  AL_STATUS_OK = 0,
  AL_STATUS_NULL_POINTER = 1,
  AL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The integrator hit its stability bound or diverged.
   */
  AL_STATUS_NUMERICAL = 3,
  AL_STATUS_IO = 4,
  AL_STATUS_PANIC = 5,
} AlStatus;

typedef struct AlSingleProbe AlSingleProbe;

typedef struct AlTwinBeam AlTwinBeam;

/**
 * Physical parameters in SI units.
 */
typedef struct AlParams {
  double m;
  double omega_t;
  double k_kick;
  double omega;
  double omega_a;
  double chi_beta;
  bool pump_detuning_matched;
} AlParams;

/**
 * Momentum grid per band and time stepping.
 */
typedef struct AlGrid {
  size_t n;
  double k_halfwidth;
  double dt;
  bool interaction_picture;
} AlGrid;

/**
 * Probe-state independent flux data; `v_of_j` is NaN where the flux vanishes.
 */
typedef struct AlPointFlux {
  double x;
  double j_g;
  double cross;
  double v_of_j;
} AlPointFlux;

/**
 * Flux correlations of the twin beams at `x0` and `-x0`; ratios are NaN for a zero baseline.
 */
typedef struct AlFluxDifference {
  double outward_variance;
  double signed_variance;
  double baseline;
  double ratio;
  double signed_ratio;
} AlFluxDifference;

/**
 * Quadrature variances of the window modes; inferred values are NaN when undefined.
 */
typedef struct AlEpr {
  double vx_minus;
  double vy_minus;
  double vx_plus;
  double vy_plus;
  double vinf_x_minus;
  double vinf_y_minus;
  double product;
} AlEpr;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *al_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the next failing call.
 */
const char *al_last_error(void);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum AlStatus al_default_params(struct AlParams *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum AlStatus al_opo_default_params(struct AlParams *out);

/**
 * Runs the scenario described by a config file and writes its CSV files.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum AlStatus al_run_config(const char *path);

/**
 * Creates a single-probe system at `t = 0` on a band centred on the kick.
 *
 * # Safety
 * `params` and `grid` must be readable, `out` writable.
 */
enum AlStatus al_single_new(const struct AlParams *params,
                            const struct AlGrid *grid,
                            struct AlSingleProbe **out);

/**
 * # Safety
 * `handle` must come from [`al_single_new`] and not be used afterwards. NULL is ignored.
 */
void al_single_free(struct AlSingleProbe *handle);

/**
 * Advances to time `t`, which must not precede the current time.
 *
 * # Safety
 * `handle` must be a live handle.
 */
enum AlStatus al_single_advance(struct AlSingleProbe *handle, double t);

/**
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
enum AlStatus al_single_time(const struct AlSingleProbe *handle, double *out);

/**
 * Fraction of the probe converted to free atoms, `int |G|^2`.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
enum AlStatus al_single_outcoupled_fraction(const struct AlSingleProbe *handle, double *out);

/**
 * Largest entry of `U^dagger U - I` for the mode-function matrix.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
enum AlStatus al_single_unitarity_error(const struct AlSingleProbe *handle, double *out);

/**
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
enum AlStatus al_single_point_flux(const struct AlSingleProbe *handle,
                                   double x,
                                   struct AlPointFlux *out);

/**
 * Creates a twin-beam system at `t = 0` with `grid.n` samples per beam.
 *
 * # Safety
 * `params` and `grid` must be readable, `out` writable.
 */
enum AlStatus al_twin_new(const struct AlParams *params,
                          const struct AlGrid *grid,
                          struct AlTwinBeam **out);

/**
 * # Safety
 * `handle` must come from [`al_twin_new`] and not be used afterwards. NULL is ignored.
 */
void al_twin_free(struct AlTwinBeam *handle);

/**
 * # Safety
 * `handle` must be a live handle.
 */
enum AlStatus al_twin_advance(struct AlTwinBeam *handle, double t);

/**
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
enum AlStatus al_twin_time(const struct AlTwinBeam *handle, double *out);

/**
 * Largest violation of the Bogoliubov identities.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
enum AlStatus al_twin_bogoliubov_error(const struct AlTwinBeam *handle, double *out);

/**
 * Flux correlations at `x0` and `-x0` for vacuum input.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
enum AlStatus al_twin_flux_difference(const struct AlTwinBeam *handle,
                                      double x0,
                                      struct AlFluxDifference *out);

/**
 * Quadrature correlations of the windows `[x2, x1]` and `[-x1, -x2]` for vacuum input.
 * `directional` selects the carrier `e^{+-ikx}` per beam instead of `e^{ikx}` for both.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
enum AlStatus al_twin_epr(const struct AlTwinBeam *handle,
                          double x1,
                          double x2,
                          bool directional,
                          struct AlEpr *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ATOMLASER_H */
