#ifndef FISHREP_H
#define FISHREP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Vertex sampling method for [`fr_contour_sample`].
 */
typedef enum FrSampling {
  FR_SAMPLING_UNIFORM_ANGULAR = 0,
  FR_SAMPLING_UNIFORM_PERIMETER = 1,
  FR_SAMPLING_ADAPTIVE = 2,
} FrSampling;

/**
 * Result code of every call.
 */
typedef enum FrStatus {
  FR_STATUS_OK = 0,
  FR_STATUS_NULL_POINTER = 1,
  FR_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Bad input data: degenerate contour, unknown camera, out of bounds.
   */
  FR_STATUS_DATA = 3,
  /**
   * A numeric procedure failed or the input is outside the model domain.
   */
  FR_STATUS_NUMERIC = 4,
  FR_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  FR_STATUS_PANIC = 6,
} FrStatus;

/**
 * Polynomial fisheye camera.
 */
typedef struct FrCamera FrCamera;

/**
 * Validated, counter-clockwise instance contour.
 */
typedef struct FrContour FrContour;

typedef struct FrDivisionFit {
  double f;
  double lambda;
  double max_abs_residual;
  double rms_residual;
} FrDivisionFit;

typedef struct FrStandardBox {
  double cx;
  double cy;
  double width;
  double height;
} FrStandardBox;

/**
 * Rotated box or ellipse: `width` (or the major axis) runs along
 * `angle_deg`.
 */
typedef struct FrRotatedShape {
  double cx;
  double cy;
  double width;
  double height;
  double angle_deg;
} FrRotatedShape;

/**
 * Annular sector around (`ox`, `oy`). When `degenerate` is nonzero the
 * fields hold an oriented box as documented for the Rust type.
 */
typedef struct FrCurvedBox {
  double ox;
  double oy;
  double r1;
  double r2;
  double theta1;
  double theta2;
  uint8_t degenerate;
} FrCurvedBox;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *fr_last_error(void);

/**
 * Camera from polynomial coefficients `a1..a4` (radius in px for a field
 * angle in rad), principal point, image size and field-angle limit (rad).
 *
 * # Safety
 * `coeffs` must point to 4 doubles; `out_camera` must be writable.
 */
enum FrStatus fr_camera_new(const double *coeffs,
                            double cx,
                            double cy,
                            uint32_t width,
                            uint32_t height,
                            double max_field_angle,
                            struct FrCamera **out_camera);

/**
 * One camera of the bundled four-camera rig: "front", "rear", "left" or
 * "right".
 *
 * # Safety
 * `id` must be a NUL-terminated string; `out_camera` must be writable.
 */
enum FrStatus fr_camera_shipped(const char *id, struct FrCamera **out_camera);

/**
 * # Safety
 * `camera` must come from `fr_camera_new`/`fr_camera_shipped` and not be
 * freed yet, or be null.
 */
void fr_camera_free(struct FrCamera *camera);

/**
 * Projects a camera-frame point (z along the optical axis) to pixels.
 *
 * # Safety
 * `xyz` must point to 3 doubles and `out_xy` to 2 writable doubles.
 */
enum FrStatus fr_camera_project(const struct FrCamera *camera, const double *xyz, double *out_xy);

/**
 * Unit viewing ray of a pixel, in the camera frame.
 *
 * # Safety
 * `xy` must point to 2 doubles and `out_xyz` to 3 writable doubles.
 */
enum FrStatus fr_camera_unproject(const struct FrCamera *camera, const double *xy, double *out_xyz);

/**
 * Least-squares division model over `samples` field angles.
 *
 * # Safety
 * `out_fit` must be writable.
 */
enum FrStatus fr_camera_fit_division(const struct FrCamera *camera,
                                     size_t samples,
                                     struct FrDivisionFit *out_fit);

/**
 * Contour from `n` interleaved x, y pairs.
 *
 * # Safety
 * `xy` must point to `2 * n` doubles; `out_contour` must be writable.
 */
enum FrStatus fr_contour_new(const double *xy, size_t n, struct FrContour **out_contour);

/**
 * # Safety
 * `contour` must come from `fr_contour_new` and not be freed yet, or be
 * null.
 */
void fr_contour_free(struct FrContour *contour);

/**
 * Vertex count after validation, or 0 for a null handle.
 *
 * # Safety
 * `contour` must be a live handle or null.
 */
size_t fr_contour_len(const struct FrContour *contour);

/**
 * # Safety
 * `out_box` must be writable.
 */
enum FrStatus fr_fit_standard_box(const struct FrContour *contour, struct FrStandardBox *out_box);

/**
 * Minimum-area enclosing rotated box.
 *
 * # Safety
 * `out_box` must be writable.
 */
enum FrStatus fr_fit_oriented_box(const struct FrContour *contour, struct FrRotatedShape *out_box);

/**
 * Minimum-volume enclosing ellipse; `width`/`height` are the full axes.
 *
 * # Safety
 * `out_ellipse` must be writable.
 */
enum FrStatus fr_fit_ellipse(const struct FrContour *contour, struct FrRotatedShape *out_ellipse);

/**
 * Best-IoU curved box against the contour's mask on a `width` x `height`
 * image.
 *
 * # Safety
 * `out_box` must be writable.
 */
enum FrStatus fr_fit_curved_box(const struct FrContour *contour,
                                size_t width,
                                size_t height,
                                struct FrCurvedBox *out_box);

/**
 * Samples `n` polygon vertices into `out_xy` (capacity `capacity` pairs)
 * and stores the count written in `out_len`.
 *
 * # Safety
 * `out_xy` must have room for `2 * capacity` doubles; `out_len` must be
 * writable.
 */
enum FrStatus fr_contour_sample(const struct FrContour *contour,
                                enum FrSampling method,
                                size_t n,
                                double *out_xy,
                                size_t capacity,
                                size_t *out_len);

/**
 * Raster IoU of two contours on a grid whose longer side has 512 cells.
 *
 * # Safety
 * `out_iou` must be writable.
 */
enum FrStatus fr_contour_iou(const struct FrContour *a, const struct FrContour *b, double *out_iou);

/**
 * Library version, a static NUL-terminated string.
 */
const char *fr_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FISHREP_H */
