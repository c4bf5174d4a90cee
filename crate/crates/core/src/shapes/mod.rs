//! The six shape representations, their areas, polygonal discretizations,
//! parameter counts and footpoints.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::geometry::{polygon_area, Contour, Point2};

/// Boundary tolerance (px) used whenever a curved shape is turned into a
/// polygon for IoU, both during fitting and during evaluation.
pub const ARC_TOLERANCE: f64 = 0.25;

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardBox {
    pub center: Point2,
    pub width: f64,
    pub height: f64,
}

/// Rotated box. `width` runs along the direction `angle_deg`, measured from
/// the image x axis toward +y, in [-90, 90).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub center: Point2,
    pub width: f64,
    pub height: f64,
    pub angle_deg: f64,
}

/// Ellipse with full axis lengths; `major` runs along `angle_deg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseShape {
    pub center: Point2,
    pub major: f64,
    pub minor: f64,
    pub angle_deg: f64,
}

/// Annular sector: the region between circles of radius `r1 < r2` about
/// `circle_center`, for polar angles in `[theta1, theta2]`.
///
/// When `degenerate` is set the box is the straight-edged limit (circle
/// center at infinity) and the fields hold an oriented box instead:
/// `circle_center` is its center, `r1`/`r2` its width/height and
/// `theta1 == theta2` its angle in radians. See [`CurvedBox::as_oriented`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvedBox {
    pub circle_center: Point2,
    pub r1: f64,
    pub r2: f64,
    pub theta1: f64,
    pub theta2: f64,
    #[serde(default)]
    pub degenerate: bool,
}

impl CurvedBox {
    pub fn from_oriented(b: &OrientedBox) -> Self {
        let t = b.angle_deg.to_radians();
        Self { circle_center: b.center, r1: b.width, r2: b.height, theta1: t, theta2: t, degenerate: true }
    }

    /// The straight-edged limit box, if this is one.
    pub fn as_oriented(&self) -> Option<OrientedBox> {
        self.degenerate.then(|| OrientedBox {
            center: self.circle_center,
            width: self.r1,
            height: self.r2,
            angle_deg: self.theta1.to_degrees(),
        })
    }

    /// Corner `k` in order inner-start, outer-start, outer-end, inner-end.
    pub fn corners(&self) -> [Point2; 4] {
        if let Some(b) = self.as_oriented() {
            return oriented_corners(b.center, b.width, b.height, b.angle_deg.to_radians());
        }
        let c = self.circle_center;
        [
            c + Point2::from_polar(self.r1, self.theta1),
            c + Point2::from_polar(self.r2, self.theta1),
            c + Point2::from_polar(self.r2, self.theta2),
            c + Point2::from_polar(self.r1, self.theta2),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingKind {
    UniformPerimeter,
    Adaptive,
}

/// Polygon stored as vertex offsets from the object centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexPolygon {
    pub origin: Point2,
    pub vertices: Vec<Point2>,
    pub sampling_kind: SamplingKind,
}

impl VertexPolygon {
    pub fn absolute_vertices(&self) -> Vec<Point2> {
        self.vertices.iter().map(|&v| self.origin + v).collect()
    }
}

/// One angular sector of a [`PolarPolygon`]. `alpha` counts the polygon
/// vertices that fall in the sector; `(r, theta)` is its representative
/// vertex and is only meaningful when `alpha > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarSector {
    pub r: f64,
    pub theta: f64,
    pub alpha: u32,
}

/// Polygon encoded in polar form about `center`. Sector `i` of `N` is
/// centered on the ray at `i·2π/N` and covers `[(i-½)·2π/N, (i+½)·2π/N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarPolygon {
    pub center: Point2,
    pub sectors: Vec<PolarSector>,
}

impl PolarPolygon {
    pub fn sector_count(&self) -> usize {
        self.sectors.len()
    }

    pub fn sector_width(&self) -> f64 {
        TAU / self.sectors.len() as f64
    }

    /// One vertex per occupied sector, in angular order.
    pub fn vertices(&self) -> Vec<Point2> {
        self.sectors
            .iter()
            .filter(|s| s.alpha > 0)
            .map(|s| self.center + Point2::from_polar(s.r, s.theta))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Standard(StandardBox),
    Oriented(OrientedBox),
    Ellipse(EllipseShape),
    Curved(CurvedBox),
    Polygon(VertexPolygon),
    Polar(PolarPolygon),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    Standard,
    Oriented,
    Ellipse,
    Curved,
    /// Vertex polygon with the given vertex count.
    Polygon(usize),
    /// Polar polygon with the given sector count.
    Polar(usize),
}

impl Shape {
    pub fn kind(&self) -> ShapeKind {
        match self {
            Shape::Standard(_) => ShapeKind::Standard,
            Shape::Oriented(_) => ShapeKind::Oriented,
            Shape::Ellipse(_) => ShapeKind::Ellipse,
            Shape::Curved(_) => ShapeKind::Curved,
            Shape::Polygon(p) => ShapeKind::Polygon(p.vertices.len()),
            Shape::Polar(p) => ShapeKind::Polar(p.sectors.len()),
        }
    }
}

/// Number of regressed parameters. Polygons count two per vertex; the polar
/// form counts the center plus `(r, θ, α)` per sector.
pub fn param_count(kind: ShapeKind) -> usize {
    match kind {
        ShapeKind::Standard => 4,
        ShapeKind::Oriented | ShapeKind::Ellipse => 5,
        ShapeKind::Curved => 6,
        ShapeKind::Polygon(n) => 2 * n,
        ShapeKind::Polar(n) => 2 + 3 * n,
    }
}

/// Corners of a `w × h` box rotated by `angle` (radians) about `center`.
/// Every box-like polygon goes through here so that equal boxes rasterize
/// identically.
pub fn oriented_corners(center: Point2, w: f64, h: f64, angle: f64) -> [Point2; 4] {
    let (s, c) = angle.sin_cos();
    let u = Point2::new(c, s) * (0.5 * w);
    let v = Point2::new(-s, c) * (0.5 * h);
    [center - u - v, center + u - v, center + u + v, center - u + v]
}

/// Exact area.
pub fn shape_area(shape: &Shape) -> f64 {
    match shape {
        Shape::Standard(b) => b.width * b.height,
        Shape::Oriented(b) => b.width * b.height,
        Shape::Ellipse(e) => PI * 0.25 * e.major * e.minor,
        Shape::Curved(b) => match b.as_oriented() {
            Some(o) => o.width * o.height,
            None => 0.5 * (b.theta2 - b.theta1) * (b.r2 * b.r2 - b.r1 * b.r1),
        },
        Shape::Polygon(p) => polygon_area(&p.vertices),
        Shape::Polar(p) => polygon_area(&p.vertices()),
    }
}

/// Segments needed so an arc of radius `r` spanning `sweep` radians stays
/// within `tol` of its chords.
fn arc_segments(r: f64, sweep: f64, tol: f64) -> usize {
    if !(r > tol) {
        return 1;
    }
    let step = 2.0 * (1.0 - tol / r).acos();
    ((sweep.abs() / step).ceil() as usize).max(1)
}

/// Points on an arc from `t0` to `t1`, both endpoints included.
fn arc_points(out: &mut Vec<Point2>, c: Point2, r: f64, t0: f64, t1: f64, tol: f64) {
    let n = arc_segments(r, t1 - t0, tol);
    for k in 0..=n {
        let t = t0 + (t1 - t0) * k as f64 / n as f64;
        out.push(c + Point2::from_polar(r, t));
    }
}

/// Vertex loop of a curved box: outer arc forward, inner arc back.
pub fn curved_box_points(b: &CurvedBox, tol: f64) -> Vec<Point2> {
    if let Some(o) = b.as_oriented() {
        return oriented_corners(o.center, o.width, o.height, o.angle_deg.to_radians()).to_vec();
    }
    let mut out = Vec::new();
    arc_points(&mut out, b.circle_center, b.r2, b.theta1, b.theta2, tol);
    arc_points(&mut out, b.circle_center, b.r1, b.theta2, b.theta1, tol);
    out
}

pub fn ellipse_points(e: &EllipseShape, tol: f64) -> Vec<Point2> {
    let (a, b) = (0.5 * e.major, 0.5 * e.minor);
    // parametric steps sized for the circumscribed circle bound the
    // sagitta everywhere on the ellipse
    let n = arc_segments(a, TAU, tol).max(8);
    let (s, c) = e.angle_deg.to_radians().sin_cos();
    (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            let (x, y) = (a * t.cos(), b * t.sin());
            e.center + Point2::new(c * x - s * y, s * x + c * y)
        })
        .collect()
}

/// Vertex loop of any shape, curved parts within `arc_tolerance` px.
pub fn shape_points(shape: &Shape, arc_tolerance: f64) -> Vec<Point2> {
    match shape {
        Shape::Standard(b) => oriented_corners(b.center, b.width, b.height, 0.0).to_vec(),
        Shape::Oriented(b) => oriented_corners(b.center, b.width, b.height, b.angle_deg.to_radians()).to_vec(),
        Shape::Ellipse(e) => ellipse_points(e, arc_tolerance),
        Shape::Curved(b) => curved_box_points(b, arc_tolerance),
        Shape::Polygon(p) => p.absolute_vertices(),
        Shape::Polar(p) => p.vertices(),
    }
}

/// Polygonal discretization with Hausdorff error at most `arc_tolerance`.
/// Boxes come back as exact 4-gons.
pub fn shape_to_polygon(shape: &Shape, arc_tolerance: f64) -> Contour {
    Contour::from_vertices_unchecked(shape_points(shape, arc_tolerance))
}

/// Bottom-most boundary point (largest image y). Ties, such as the bottom
/// edge of an axis-aligned box, resolve to the median x of the tied
/// boundary vertices.
pub fn footpoint(shape: &Shape) -> Point2 {
    match shape {
        Shape::Ellipse(e) => {
            let (a, b) = (0.5 * e.major, 0.5 * e.minor);
            let (s, c) = e.angle_deg.to_radians().sin_cos();
            // y(t) = cy + a·cos t·s + b·sin t·c is maximal at t = atan2(b·c, a·s)
            let t = (b * c).atan2(a * s);
            let (x, y) = (a * t.cos(), b * t.sin());
            e.center + Point2::new(c * x - s * y, s * x + c * y)
        }
        Shape::Curved(b) if !b.degenerate => {
            let mut cands = b.corners().to_vec();
            let down = PI / 2.0;
            let k = ((b.theta1 - down) / TAU).ceil();
            if down + k * TAU <= b.theta2 {
                cands.push(b.circle_center + Point2::new(0.0, b.r2));
            }
            lowest_median(&cands)
        }
        other => lowest_median(&shape_points(other, ARC_TOLERANCE)),
    }
}

fn lowest_median(points: &[Point2]) -> Point2 {
    let ymax = points.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * (1.0 + ymax.abs());
    let mut xs: Vec<f64> = points.iter().filter(|p| p.y >= ymax - tol).map(|p| p.x).collect();
    xs.sort_by(f64::total_cmp);
    let m = xs.len();
    let x = if m % 2 == 1 { xs[m / 2] } else { 0.5 * (xs[m / 2 - 1] + xs[m / 2]) };
    Point2::new(x, ymax)
}

/// Object center of a curved box: the midpoint of its mean-radius arc.
/// The straight-edged limit returns the box center.
pub fn curved_box_center(b: &CurvedBox) -> Point2 {
    if b.degenerate {
        return b.circle_center;
    }
    let mid = 0.5 * (b.theta1 + b.theta2);
    b.circle_center + Point2::from_polar(0.5 * (b.r1 + b.r2), mid)
}

/// Inverse of [`curved_box_center`]: the curved box whose object center is
/// `center`.
pub fn curved_box_from_center(center: Point2, r1: f64, r2: f64, theta1: f64, theta2: f64) -> CurvedBox {
    let mid = 0.5 * (theta1 + theta2);
    let circle_center = center - Point2::from_polar(0.5 * (r1 + r2), mid);
    CurvedBox { circle_center, r1, r2, theta1, theta2, degenerate: false }
}
