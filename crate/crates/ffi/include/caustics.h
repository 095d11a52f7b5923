#ifndef CAUSTICS_H
#define CAUSTICS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CausticsStatus {
  CAUSTICS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CAUSTICS_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  CAUSTICS_STATUS_INVALID_UTF8 = 2,
  /**
   * Bad input: malformed spec, parameter out of range, point outside the
   * chart, non-convex curve.
   */
  CAUSTICS_STATUS_CONFIGURATION = 3,
  /**
   * A numerical stage failed (integration, root finding, convergence).
   */
  CAUSTICS_STATUS_NUMERICAL = 4,
  /**
   * An internal panic was caught.
   */
  CAUSTICS_STATUS_PANIC = 5,
} CausticsStatus;

/**
 * A metric chart.
 */
typedef struct CausticsChart CausticsChart;

/**
 * A convex curve with its chart.
 */
typedef struct CausticsCurve CausticsCurve;

/**
 * A parameter of a closed curve in which string diffeomorphisms are shifts.
 */
typedef struct CausticsPoritsky CausticsPoritsky;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length without the NUL, or
 * 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t caustics_last_error(char *buf, size_t len);

/**
 * Library version, a static NUL-terminated string.
 */
const char *caustics_version(void);

/**
 * Builds a chart from its JSON description.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CausticsStatus caustics_chart_from_json(const char *json, struct CausticsChart **out);

/**
 * # Safety
 * `chart` must be null or a handle from [`caustics_chart_from_json`] not yet freed.
 */
void caustics_chart_free(struct CausticsChart *chart);

/**
 * Metric components `g11, g12, g22` at `(u, v)`, written to `out[0..3]`.
 *
 * # Safety
 * `chart` must be a live handle; `out` must hold three doubles.
 */
enum CausticsStatus caustics_chart_metric(const struct CausticsChart *chart,
                                          double u,
                                          double v,
                                          double *out);

/**
 * Length of the shortest geodesic between two points.
 *
 * # Safety
 * `chart` must be a live handle; `length` must be writable.
 */
enum CausticsStatus caustics_geodesic_distance(const struct CausticsChart *chart,
                                               double u0,
                                               double v0,
                                               double u1,
                                               double v1,
                                               double *length);

/**
 * `|L+ − L−|` for the diagonals of the quad `[u1, u2] × [v1, v2]`.
 *
 * # Safety
 * `chart` must be a live handle; `defect` must be writable.
 */
enum CausticsStatus caustics_ivory_defect(const struct CausticsChart *chart,
                                          double u1,
                                          double u2,
                                          double v1,
                                          double v2,
                                          double *defect);

/**
 * Builds a curve from its JSON description. A spec without its own chart is
 * placed in `chart`, or in the Euclidean plane when `chart` is null.
 *
 * # Safety
 * `json` must be a NUL-terminated string, `chart` null or a live handle,
 * `out` writable.
 */
enum CausticsStatus caustics_curve_from_json(const char *json,
                                             const struct CausticsChart *chart,
                                             struct CausticsCurve **out);

/**
 * # Safety
 * `curve` must be null or a live handle.
 */
void caustics_curve_free(struct CausticsCurve *curve);

/**
 * Metric length of the curve.
 *
 * # Safety
 * `curve` must be a live handle; `length` must be writable.
 */
enum CausticsStatus caustics_curve_length(const struct CausticsCurve *curve, double *length);

/**
 * One step of the billiard map inside `table`, phase coordinates
 * `(s, p)` = (arc length, cosine of the angle with the tangent).
 *
 * # Safety
 * `table` must be a live handle; `s_out`, `p_out` must be writable.
 */
enum CausticsStatus caustics_billiard_map(const struct CausticsCurve *table,
                                          double s,
                                          double p,
                                          double *s_out,
                                          double *p_out);

/**
 * Parameter `b` of the point reached from parameter `a` by the string
 * diffeomorphism of excess `p`.
 *
 * # Safety
 * `caustic` must be a live handle; `b` must be writable.
 */
enum CausticsStatus caustics_string_diffeo(const struct CausticsCurve *caustic,
                                           double p,
                                           double a,
                                           double *b);

/**
 * Shift parameter of a closed caustic from `n` iterates of the string
 * diffeomorphism of excess `p_ref`.
 *
 * # Safety
 * `caustic` must be a live handle; `out` must be writable.
 */
enum CausticsStatus caustics_poritsky_new(const struct CausticsCurve *caustic,
                                          double p_ref,
                                          size_t n,
                                          struct CausticsPoritsky **out);

/**
 * # Safety
 * `param` must be null or a live handle.
 */
void caustics_poritsky_free(struct CausticsPoritsky *param);

/**
 * `t(τ)` in `[0, 1)`; `smooth` selects the trigonometric evaluation over the
 * interpolated orbit rank.
 *
 * # Safety
 * `param` must be a live handle; `t` must be writable.
 */
enum CausticsStatus caustics_poritsky_eval(const struct CausticsPoritsky *param,
                                           double tau,
                                           bool smooth,
                                           double *t);

/**
 * Rotation number of the reference string diffeomorphism.
 *
 * # Safety
 * `param` must be a live handle; `rho` must be writable.
 */
enum CausticsStatus caustics_poritsky_rotation(const struct CausticsPoritsky *param, double *rho);

/**
 * Runs the check suite of a JSON experiment config. On success `report`
 * receives the JSON report (release with [`caustics_string_free`]) and
 * `exit_code` the suite verdict: 0 all passed, 1 a check failed, 2 a check
 * was rejected on its input.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `report` and `exit_code`
 * must be writable.
 */
enum CausticsStatus caustics_suite_run(const char *config_json, char **report, int *exit_code);

/**
 * Releases a string returned by the library.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void caustics_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAUSTICS_H */
