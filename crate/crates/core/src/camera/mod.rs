//! Fisheye projection models.
//!
//! Camera frame: `z` along the optical axis, `x` right, `y` down, so image
//! points are `principal_point + r(θ) · (x, y) / ‖(x, y)‖` where `θ` is the
//! angle between the incoming ray and the optical axis.

mod division;
mod rig;

pub use division::{
    fit_division_model, invert_division_radius, uniform_theta_grid, DivisionFit, DivisionModel,
    DEFAULT_FIT_SAMPLES,
};
pub use rig::{CalibrationFile, CameraCalibration, CameraId, CameraRig, Pose, PoseConfig, RigCamera};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{fit_circle_kasa, Point2};

pub type Vec3 = [f64; 3];

pub(crate) fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub(crate) fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn scale3(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Field angle of a camera-frame point; `None` at the origin.
pub fn field_angle(p: Vec3) -> Option<f64> {
    let rho = p[0].hypot(p[1]);
    if rho == 0.0 && p[2] == 0.0 {
        return None;
    }
    Some(rho.atan2(p[2]))
}

/// A radially symmetric fisheye model.
pub trait RadialModel {
    fn principal_point(&self) -> Point2;
    fn max_field_angle(&self) -> f64;
    /// Image radius (pixels) for field angle `theta` (radians).
    fn radius(&self, theta: f64) -> Result<f64>;

    /// Projects a camera-frame point to the image.
    fn project_point(&self, p: Vec3) -> Result<Point2> {
        if !(p[0].is_finite() && p[1].is_finite() && p[2].is_finite()) {
            return Err(Error::NonFiniteInput(format!("point {p:?}")));
        }
        let theta = field_angle(p).ok_or(Error::DegeneratePoint)?;
        let max = self.max_field_angle();
        if theta > max + 1e-12 {
            return Err(Error::FieldAngleExceeded { angle: theta, max });
        }
        let rho = p[0].hypot(p[1]);
        let pp = self.principal_point();
        if rho == 0.0 {
            return Ok(pp);
        }
        let r = self.radius(theta)?;
        Ok(Point2::new(pp.x + r * p[0] / rho, pp.y + r * p[1] / rho))
    }

    /// Unit camera-frame ray through an image point, or `None` beyond the
    /// maximum field angle.
    fn unproject(&self, pixel: Point2) -> Option<Vec3> {
        let d = pixel - self.principal_point();
        let rho = d.norm();
        if rho == 0.0 {
            return Some([0.0, 0.0, 1.0]);
        }
        let max = self.max_field_angle();
        let rmax = self.radius(max).ok()?;
        if rho > rmax {
            return None;
        }
        // r(θ) is strictly increasing; bisection is exact enough and robust.
        let (mut lo, mut hi) = (0.0, max);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            match self.radius(mid) {
                Ok(r) if r < rho => lo = mid,
                _ => hi = mid,
            }
        }
        let theta = 0.5 * (lo + hi);
        let s = theta.sin() / rho;
        Some([d.x * s, d.y * s, theta.cos()])
    }
}

/// `r(θ) = a1·θ + a2·θ² + a3·θ³ + a4·θ⁴` about a principal point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialFisheyeModel {
    coeffs: [f64; 4],
    principal_point: Point2,
    image_size: [u32; 2],
    max_field_angle: f64,
}

const MONOTONIC_GRID: usize = 2048;

impl PolynomialFisheyeModel {
    /// Validates `r(0) = 0` (implicit) and strict monotonicity of `r` on a
    /// dense grid over `[0, max_field_angle]`.
    pub fn new(coeffs: [f64; 4], principal_point: Point2, image_size: [u32; 2], max_field_angle: f64) -> Result<Self> {
        if !(max_field_angle > 0.0) || !max_field_angle.is_finite() || max_field_angle >= std::f64::consts::PI {
            return Err(Error::InvalidModel(format!("max field angle {max_field_angle}")));
        }
        if coeffs.iter().any(|c| !c.is_finite()) || !principal_point.is_finite() {
            return Err(Error::InvalidModel("non-finite parameters".into()));
        }
        let m = Self { coeffs, principal_point, image_size, max_field_angle };
        let mut prev = 0.0;
        for k in 1..=MONOTONIC_GRID {
            let t = max_field_angle * k as f64 / MONOTONIC_GRID as f64;
            let r = m.radius_unchecked(t);
            if !(r > prev) || !(m.derivative(t) > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "radius function not strictly increasing near θ = {t:.4} rad"
                )));
            }
            prev = r;
        }
        if !(m.derivative(0.0) > 0.0) {
            return Err(Error::InvalidModel("a1 must be positive".into()));
        }
        Ok(m)
    }

    pub fn coeffs(&self) -> [f64; 4] {
        self.coeffs
    }

    pub fn image_size(&self) -> [u32; 2] {
        self.image_size
    }

    /// Horner evaluation without range checks.
    pub fn radius_unchecked(&self, t: f64) -> f64 {
        let [a1, a2, a3, a4] = self.coeffs;
        t * (a1 + t * (a2 + t * (a3 + t * a4)))
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let [a1, a2, a3, a4] = self.coeffs;
        a1 + t * (2.0 * a2 + t * (3.0 * a3 + t * 4.0 * a4))
    }

    /// The same lens on an image resampled by `factor` (e.g. 0.25 for a 4x
    /// downscale).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let size = [
            (self.image_size[0] as f64 * factor).round() as u32,
            (self.image_size[1] as f64 * factor).round() as u32,
        ];
        Self::new(
            self.coeffs.map(|c| c * factor),
            self.principal_point * factor,
            size,
            self.max_field_angle,
        )
    }
}

impl RadialModel for PolynomialFisheyeModel {
    fn principal_point(&self) -> Point2 {
        self.principal_point
    }

    fn max_field_angle(&self) -> f64 {
        self.max_field_angle
    }

    fn radius(&self, theta: f64) -> Result<f64> {
        if theta > self.max_field_angle + 1e-12 {
            return Err(Error::FieldAngleExceeded { angle: theta, max: self.max_field_angle });
        }
        Ok(self.radius_unchecked(theta))
    }
}

/// `r = a·θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquidistantModel {
    pub a: f64,
    pub principal_point: Point2,
    pub max_field_angle: f64,
}

impl EquidistantModel {
    pub fn new(a: f64, principal_point: Point2, max_field_angle: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidModel(format!("equidistant scale {a} must be positive")));
        }
        Ok(Self { a, principal_point, max_field_angle })
    }
}

impl RadialModel for EquidistantModel {
    fn principal_point(&self) -> Point2 {
        self.principal_point
    }

    fn max_field_angle(&self) -> f64 {
        self.max_field_angle
    }

    fn radius(&self, theta: f64) -> Result<f64> {
        if theta > self.max_field_angle + 1e-12 {
            return Err(Error::FieldAngleExceeded { angle: theta, max: self.max_field_angle });
        }
        Ok(self.a * theta)
    }
}

/// Free-function form of [`RadialModel::project_point`].
pub fn project_point<M: RadialModel + ?Sized>(model: &M, point: Vec3) -> Result<Point2> {
    model.project_point(point)
}

/// A 3D line `P(t) = D·t + Q` with unit direction `D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line3D {
    direction: Vec3,
    point: Vec3,
}

impl Line3D {
    pub fn new(direction: Vec3, point: Vec3) -> Result<Self> {
        let n = norm3(direction);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::DegenerateInput("line direction must be non-zero".into()));
        }
        Ok(Self { direction: scale3(direction, 1.0 / n), point })
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn point(&self) -> Vec3 {
        self.point
    }

    pub fn at(&self, t: f64) -> Vec3 {
        add3(scale3(self.direction, t), self.point)
    }

    /// Smallest distance from the origin to the segment `t ∈ [t0, t1]`.
    pub fn origin_distance(&self, t0: f64, t1: f64) -> f64 {
        let t = (-dot3(self.direction, self.point)).clamp(t0.min(t1), t0.max(t1));
        norm3(self.at(t))
    }
}

/// Projects `n_samples` evenly spaced points of the segment
/// `t ∈ [t_range.0, t_range.1]`.
pub fn project_line_curve<M: RadialModel + ?Sized>(
    model: &M,
    line: &Line3D,
    t_range: (f64, f64),
    n_samples: usize,
) -> Result<Vec<Point2>> {
    if n_samples < 2 {
        return Err(Error::DegenerateInput(format!("need at least 2 samples, got {n_samples}")));
    }
    let scale = norm3(line.point()).max(1.0);
    if line.origin_distance(t_range.0, t_range.1) <= 1e-12 * scale {
        return Err(Error::DegeneratePoint);
    }
    let (t0, t1) = t_range;
    (0..n_samples)
        .map(|k| {
            let t = t0 + (t1 - t0) * k as f64 / (n_samples - 1) as f64;
            model.project_point(line.at(t))
        })
        .collect()
}

/// Maximum orthogonal distance (pixels) of the projected segment samples to
/// their best-fit circle (or line, for radial lines).
pub fn line_circle_residual<M: RadialModel + ?Sized>(
    model: &M,
    line: &Line3D,
    t_range: (f64, f64),
    n_samples: usize,
) -> Result<f64> {
    if n_samples < 5 {
        return Err(Error::DegenerateInput(format!("need at least 5 samples, got {n_samples}")));
    }
    let pts = project_line_curve(model, line, t_range, n_samples)?;
    Ok(fit_circle_kasa(&pts)?.max_residual())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(coeffs: [f64; 4]) -> PolynomialFisheyeModel {
        PolynomialFisheyeModel::new(coeffs, Point2::new(640.0, 480.0), [1280, 966], 95f64.to_radians()).unwrap()
    }

    #[test]
    fn on_axis_maps_to_principal_point() {
        let m = poly([337.531, 13.387, -28.98, 20.779]);
        assert_eq!(m.project_point([0.0, 0.0, 5.0]).unwrap(), Point2::new(640.0, 480.0));
    }

    #[test]
    fn equidistant_equivalent_offset() {
        let m = poly([100.0, 0.0, 0.0, 0.0]);
        let p = [0.5f64.sin(), 0.0, 0.5f64.cos()];
        let q = m.project_point(p).unwrap();
        assert!((q.x - 690.0).abs() < 1e-9 && (q.y - 480.0).abs() < 1e-12);
    }

    #[test]
    fn horner_matches_power_sum() {
        let c = [337.531, 13.387, -28.98, 20.779];
        let m = poly(c);
        let t: f64 = 1.2;
        let direct = c[0] * t + c[1] * t.powi(2) + c[2] * t.powi(3) + c[3] * t.powi(4);
        let p = [t.sin() * 0.6, t.sin() * 0.8, t.cos()];
        let q = m.project_point(p).unwrap();
        assert!(((q - m.principal_point()).norm() - direct).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let m = poly([100.0, 0.0, 0.0, 0.0]);
        assert_eq!(m.project_point([0.0, 0.0, 0.0]), Err(Error::DegeneratePoint));
        assert!(matches!(m.project_point([1.0, 0.0, -1.0]), Err(Error::FieldAngleExceeded { .. })));
        assert!(PolynomialFisheyeModel::new([100.0, -200.0, 0.0, 0.0], Point2::default(), [10, 10], 1.5).is_err());
    }

    #[test]
    fn line_in_axis_plane_is_radial() {
        let m = poly([337.531, 13.387, -28.98, 20.779]);
        // plane y = 0 contains the optical axis
        let line = Line3D::new([1.0, 0.0, 0.3], [-2.0, 0.0, 3.0]).unwrap();
        let pts = project_line_curve(&m, &line, (0.0, 4.0), 20).unwrap();
        for p in &pts {
            assert!((p.y - 480.0).abs() < 1e-9);
        }
    }

    #[test]
    fn equidistant_line_matches_closed_form() {
        let a = 100.0;
        let m = EquidistantModel::new(a, Point2::default(), 95f64.to_radians()).unwrap();
        let line = Line3D::new([1.0, 0.0, 0.0], [0.0, 0.5, 2.0]).unwrap();
        let pts = project_line_curve(&m, &line, (-3.0, 3.0), 7).unwrap();
        for (k, p) in pts.iter().enumerate() {
            let t = -3.0 + k as f64;
            let (x, y, z) = (t, 0.5, 2.0);
            let dxy = f64::hypot(x, y);
            let ratio = a * (dxy / z).atan() / dxy;
            assert!((p.x - x * ratio).abs() < 1e-9 && (p.y - y * ratio).abs() < 1e-9);
        }
    }

    #[test]
    fn two_samples_are_endpoints() {
        let m = poly([300.0, 0.0, 0.0, 0.0]);
        let line = Line3D::new([0.0, 1.0, 0.0], [1.0, -1.0, 4.0]).unwrap();
        let pts = project_line_curve(&m, &line, (0.0, 2.0), 2).unwrap();
        assert_eq!(pts[0], m.project_point(line.at(0.0)).unwrap());
        assert_eq!(pts[1], m.project_point(line.at(2.0)).unwrap());
    }

    #[test]
    fn line_through_center_is_degenerate() {
        let m = poly([300.0, 0.0, 0.0, 0.0]);
        let line = Line3D::new([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(project_line_curve(&m, &line, (-2.0, 2.0), 5), Err(Error::DegeneratePoint));
    }

    #[test]
    fn unproject_inverts_projection() {
        let m = poly([337.531, 13.387, -28.98, 20.779]);
        let ray = [0.3, -0.7, 0.2];
        let q = m.project_point(ray).unwrap();
        let back = m.unproject(q).unwrap();
        let n = norm3(ray);
        for i in 0..3 {
            assert!((back[i] - ray[i] / n).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn azimuth_is_preserved(x in -5.0f64..5.0, y in -5.0f64..5.0, z in 0.05f64..5.0) {
            prop_assume!(x.hypot(y) > 1e-6);
            let m = poly([337.531, 13.387, -28.98, 20.779]);
            let q = m.project_point([x, y, z]).unwrap() - m.principal_point();
            let diff = (q.angle() - y.atan2(x)).rem_euclid(std::f64::consts::TAU);
            prop_assert!(diff < 1e-9 || std::f64::consts::TAU - diff < 1e-9);
        }

        #[test]
        fn polynomial_equals_equidistant(x in -5.0f64..5.0, y in -5.0f64..5.0, z in -0.05f64..5.0, a in 50.0f64..500.0) {
            prop_assume!(x.hypot(y) > 1e-3);
            let max = 95f64.to_radians();
            prop_assume!(field_angle([x, y, z]).unwrap() <= max);
            let p = PolynomialFisheyeModel::new([a, 0.0, 0.0, 0.0], Point2::new(1.0, 2.0), [10, 10], max).unwrap();
            let e = EquidistantModel::new(a, Point2::new(1.0, 2.0), max).unwrap();
            let (u, v) = (p.project_point([x, y, z]).unwrap(), e.project_point([x, y, z]).unwrap());
            prop_assert!(u.dist(v) < 1e-9);
        }
    }
}
