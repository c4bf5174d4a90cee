//! C ABI over `fishrep`.
//!
//! Objects cross the boundary as opaque handles created by `fr_*_new` and
//! released by the matching `fr_*_free`. Every function returns an
//! [`FrStatus`]; on failure [`fr_last_error`] describes the cause.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fishrep::camera::{fit_division_model, uniform_theta_grid, CameraId, CameraRig, PolynomialFisheyeModel, RadialModel};
use fishrep::fitting::{fit_curved_box, fit_ellipse, fit_oriented_box, fit_standard_box, CurvedBoxSearchConfig};
use fishrep::geometry::{polygon_pair_iou, Contour, Point2};
use fishrep::metrics::ObjectMask;
use fishrep::sampling::{sample_adaptive, sample_uniform_angular, sample_uniform_perimeter, AdaptiveSamplingConfig};
use fishrep::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Bad input data: degenerate contour, unknown camera, out of bounds.
    Data = 3,
    /// A numeric procedure failed or the input is outside the model domain.
    Numeric = 4,
    BufferTooSmall = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

/// Vertex sampling method for [`fr_contour_sample`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrSampling {
    UniformAngular = 0,
    UniformPerimeter = 1,
    Adaptive = 2,
}

/// Polynomial fisheye camera.
pub struct FrCamera {
    model: PolynomialFisheyeModel,
}

/// Validated, counter-clockwise instance contour.
pub struct FrContour {
    contour: Contour,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FrDivisionFit {
    pub f: f64,
    pub lambda: f64,
    pub max_abs_residual: f64,
    pub rms_residual: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FrStandardBox {
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
}

/// Rotated box or ellipse: `width` (or the major axis) runs along
/// `angle_deg`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FrRotatedShape {
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
    pub angle_deg: f64,
}

/// Annular sector around (`ox`, `oy`). When `degenerate` is nonzero the
/// fields hold an oriented box as documented for the Rust type.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FrCurvedBox {
    pub ox: f64,
    pub oy: f64,
    pub r1: f64,
    pub r2: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub degenerate: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: FrStatus, msg: impl Into<String>) -> FrStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> FrStatus {
    let status = if e.is_numeric() {
        FrStatus::Numeric
    } else if matches!(e, Error::Config(_)) {
        FrStatus::InvalidArgument
    } else {
        FrStatus::Data
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics and errors into status codes.
fn guard(f: impl FnOnce() -> Result<(), FrStatus>) -> FrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FrStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(FrStatus::Panic, format!("panic: {msg}"))
        }
    }
}

fn lib<T>(r: fishrep::Result<T>) -> Result<T, FrStatus> {
    r.map_err(from_error)
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, FrStatus> {
    p.as_ref().ok_or_else(|| fail(FrStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, FrStatus> {
    p.as_mut().ok_or_else(|| fail(FrStatus::NullPointer, format!("{name} is null")))
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Camera from polynomial coefficients `a1..a4` (radius in px for a field
/// angle in rad), principal point, image size and field-angle limit (rad).
///
/// # Safety
/// `coeffs` must point to 4 doubles; `out_camera` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_camera_new(
    coeffs: *const f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
    max_field_angle: f64,
    out_camera: *mut *mut FrCamera,
) -> FrStatus {
    guard(|| {
        let c = deref(coeffs, "coeffs")?;
        let out_camera = out(out_camera, "out_camera")?;
        let c = std::slice::from_raw_parts(c, 4);
        let model = lib(PolynomialFisheyeModel::new(
            [c[0], c[1], c[2], c[3]],
            Point2::new(cx, cy),
            [width, height],
            max_field_angle,
        ))?;
        *out_camera = Box::into_raw(Box::new(FrCamera { model }));
        Ok(())
    })
}

/// One camera of the bundled four-camera rig: "front", "rear", "left" or
/// "right".
///
/// # Safety
/// `id` must be a NUL-terminated string; `out_camera` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_camera_shipped(id: *const c_char, out_camera: *mut *mut FrCamera) -> FrStatus {
    guard(|| {
        let id = deref(id, "id")?;
        let out_camera = out(out_camera, "out_camera")?;
        let id = CStr::from_ptr(id)
            .to_str()
            .map_err(|_| fail(FrStatus::InvalidArgument, "camera id is not UTF-8"))?;
        let id: CameraId = lib(id.parse())?;
        let rig = CameraRig::shipped();
        let cam = rig.get(id).ok_or_else(|| fail(FrStatus::Data, format!("camera '{id}' not in the rig")))?;
        *out_camera = Box::into_raw(Box::new(FrCamera { model: cam.model.clone() }));
        Ok(())
    })
}

/// # Safety
/// `camera` must come from `fr_camera_new`/`fr_camera_shipped` and not be
/// freed yet, or be null.
#[no_mangle]
pub unsafe extern "C" fn fr_camera_free(camera: *mut FrCamera) {
    if !camera.is_null() {
        drop(Box::from_raw(camera));
    }
}

/// Projects a camera-frame point (z along the optical axis) to pixels.
///
/// # Safety
/// `xyz` must point to 3 doubles and `out_xy` to 2 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fr_camera_project(camera: *const FrCamera, xyz: *const f64, out_xy: *mut f64) -> FrStatus {
    guard(|| {
        let cam = deref(camera, "camera")?;
        let p = std::slice::from_raw_parts(deref(xyz, "xyz")?, 3);
        let o = out(out_xy, "out_xy")?;
        let px = lib(cam.model.project_point([p[0], p[1], p[2]]))?;
        let o = std::slice::from_raw_parts_mut(o, 2);
        o[0] = px.x;
        o[1] = px.y;
        Ok(())
    })
}

/// Unit viewing ray of a pixel, in the camera frame.
///
/// # Safety
/// `xy` must point to 2 doubles and `out_xyz` to 3 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fr_camera_unproject(camera: *const FrCamera, xy: *const f64, out_xyz: *mut f64) -> FrStatus {
    guard(|| {
        let cam = deref(camera, "camera")?;
        let p = std::slice::from_raw_parts(deref(xy, "xy")?, 2);
        let o = out(out_xyz, "out_xyz")?;
        let ray = cam
            .model
            .unproject(Point2::new(p[0], p[1]))
            .ok_or_else(|| fail(FrStatus::Numeric, "pixel lies outside the model's field of view"))?;
        std::slice::from_raw_parts_mut(o, 3).copy_from_slice(&ray);
        Ok(())
    })
}

/// Least-squares division model over `samples` field angles.
///
/// # Safety
/// `out_fit` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_camera_fit_division(camera: *const FrCamera, samples: usize, out_fit: *mut FrDivisionFit) -> FrStatus {
    guard(|| {
        let cam = deref(camera, "camera")?;
        let o = out(out_fit, "out_fit")?;
        let fit = lib(fit_division_model(&cam.model, &uniform_theta_grid(cam.model.max_field_angle(), samples)))?;
        *o = FrDivisionFit {
            f: fit.model.f,
            lambda: fit.model.lambda,
            max_abs_residual: fit.max_abs_residual(),
            rms_residual: fit.rms_residual(),
        };
        Ok(())
    })
}

/// Contour from `n` interleaved x, y pairs.
///
/// # Safety
/// `xy` must point to `2 * n` doubles; `out_contour` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_contour_new(xy: *const f64, n: usize, out_contour: *mut *mut FrContour) -> FrStatus {
    guard(|| {
        let xy = deref(xy, "xy")?;
        let o = out(out_contour, "out_contour")?;
        let v = std::slice::from_raw_parts(xy, 2 * n).chunks_exact(2).map(|p| Point2::new(p[0], p[1])).collect();
        let contour = lib(Contour::new(v))?;
        *o = Box::into_raw(Box::new(FrContour { contour }));
        Ok(())
    })
}

/// # Safety
/// `contour` must come from `fr_contour_new` and not be freed yet, or be
/// null.
#[no_mangle]
pub unsafe extern "C" fn fr_contour_free(contour: *mut FrContour) {
    if !contour.is_null() {
        drop(Box::from_raw(contour));
    }
}

/// Vertex count after validation, or 0 for a null handle.
///
/// # Safety
/// `contour` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fr_contour_len(contour: *const FrContour) -> usize {
    contour.as_ref().map_or(0, |c| c.contour.vertices().len())
}

/// # Safety
/// `out_box` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_fit_standard_box(contour: *const FrContour, out_box: *mut FrStandardBox) -> FrStatus {
    guard(|| {
        let c = deref(contour, "contour")?;
        let o = out(out_box, "out_box")?;
        let b = lib(fit_standard_box(&c.contour))?;
        *o = FrStandardBox { cx: b.center.x, cy: b.center.y, width: b.width, height: b.height };
        Ok(())
    })
}

/// Minimum-area enclosing rotated box.
///
/// # Safety
/// `out_box` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_fit_oriented_box(contour: *const FrContour, out_box: *mut FrRotatedShape) -> FrStatus {
    guard(|| {
        let c = deref(contour, "contour")?;
        let o = out(out_box, "out_box")?;
        let b = lib(fit_oriented_box(&c.contour))?;
        *o = FrRotatedShape { cx: b.center.x, cy: b.center.y, width: b.width, height: b.height, angle_deg: b.angle_deg };
        Ok(())
    })
}

/// Minimum-volume enclosing ellipse; `width`/`height` are the full axes.
///
/// # Safety
/// `out_ellipse` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_fit_ellipse(contour: *const FrContour, out_ellipse: *mut FrRotatedShape) -> FrStatus {
    guard(|| {
        let c = deref(contour, "contour")?;
        let o = out(out_ellipse, "out_ellipse")?;
        let e = lib(fit_ellipse(&c.contour))?;
        *o = FrRotatedShape { cx: e.center.x, cy: e.center.y, width: e.major, height: e.minor, angle_deg: e.angle_deg };
        Ok(())
    })
}

/// Best-IoU curved box against the contour's mask on a `width` x `height`
/// image.
///
/// # Safety
/// `out_box` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_fit_curved_box(
    contour: *const FrContour,
    width: usize,
    height: usize,
    out_box: *mut FrCurvedBox,
) -> FrStatus {
    guard(|| {
        let c = deref(contour, "contour")?;
        let o = out(out_box, "out_box")?;
        let gt = lib(ObjectMask::new(&c.contour, width, height))?;
        let b = lib(fit_curved_box(&c.contour, &gt.grid, &gt.mask, &CurvedBoxSearchConfig::default()))?;
        *o = FrCurvedBox {
            ox: b.circle_center.x,
            oy: b.circle_center.y,
            r1: b.r1,
            r2: b.r2,
            theta1: b.theta1,
            theta2: b.theta2,
            degenerate: b.degenerate as u8,
        };
        Ok(())
    })
}

/// Samples `n` polygon vertices into `out_xy` (capacity `capacity` pairs)
/// and stores the count written in `out_len`.
///
/// # Safety
/// `out_xy` must have room for `2 * capacity` doubles; `out_len` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fr_contour_sample(
    contour: *const FrContour,
    method: FrSampling,
    n: usize,
    out_xy: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> FrStatus {
    guard(|| {
        let c = deref(contour, "contour")?;
        let len = out(out_len, "out_len")?;
        let buf = out(out_xy, "out_xy")?;
        let pts = match method {
            FrSampling::UniformAngular => lib(sample_uniform_angular(&c.contour, n))?.vertices(),
            FrSampling::UniformPerimeter => lib(sample_uniform_perimeter(&c.contour, n))?.absolute_vertices(),
            FrSampling::Adaptive => lib(sample_adaptive(&c.contour, &AdaptiveSamplingConfig::new(n)))?.absolute_vertices(),
        };
        *len = pts.len();
        if pts.len() > capacity {
            return Err(fail(FrStatus::BufferTooSmall, format!("need {} vertices, capacity {capacity}", pts.len())));
        }
        let buf = std::slice::from_raw_parts_mut(buf, 2 * pts.len());
        for (dst, p) in buf.chunks_exact_mut(2).zip(&pts) {
            dst[0] = p.x;
            dst[1] = p.y;
        }
        Ok(())
    })
}

/// Raster IoU of two contours on a grid whose longer side has 512 cells.
///
/// # Safety
/// `out_iou` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fr_contour_iou(a: *const FrContour, b: *const FrContour, out_iou: *mut f64) -> FrStatus {
    guard(|| {
        let a = deref(a, "a")?;
        let b = deref(b, "b")?;
        let o = out(out_iou, "out_iou")?;
        *o = lib(polygon_pair_iou(a.contour.vertices(), b.contour.vertices(), 512))?;
        Ok(())
    })
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
