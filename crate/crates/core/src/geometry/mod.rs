//! Computational-geometry primitives shared by the fitters and the evaluation
//! harness: contours, masks, hulls, minimum enclosing shapes, circle fitting,
//! rasterization, IoU, arc-length resampling and discrete curvature.
//!
//! Image coordinates are used throughout: `x` to the right, `y` down, in
//! pixels. "Counter-clockwise" means positive signed shoelace area in these
//! coordinates.

mod circle;
mod clip;
mod ellipse;
mod hull;
mod raster;
mod rect;
mod resample;

pub use circle::{fit_circle_kasa, CircleFit};
pub use clip::{convex_clip_iou, is_convex};
pub use ellipse::{min_enclosing_ellipse, EnclosingEllipse, MVEE_MAX_ITERATIONS, MVEE_TOLERANCE};
pub use hull::convex_hull;
pub use raster::{
    mask_iou, polygon_mask_counts, polygon_mask_iou, polygon_pair_iou, rasterize_clipped,
    rasterize_polygon, BinaryMask, GridSpec2D,
};
pub use rect::{min_area_rect, RotatedRect};
pub use resample::{local_curvature, resample_arclength};

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2D point or vector in pixels. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, angle: f64) -> Self {
        Self::new(r * angle.cos(), r * angle.sin())
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, o: Point2, t: f64) -> Point2 {
        self + (o - self) * t
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Signed shoelace area; positive for counter-clockwise vertex order.
pub fn signed_area(points: &[Point2]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        acc += a.cross(b);
    }
    0.5 * acc
}

pub fn polygon_area(points: &[Point2]) -> f64 {
    signed_area(points).abs()
}

pub fn perimeter(points: &[Point2]) -> f64 {
    let n = points.len();
    (0..n).map(|i| points[i].dist(points[(i + 1) % n])).sum()
}

/// Area centroid of a simple polygon. Falls back to the vertex mean when the
/// area vanishes.
pub fn polygon_centroid(points: &[Point2]) -> Point2 {
    let n = points.len();
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        let c = p.cross(q);
        a2 += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    if a2.abs() <= f64::EPSILON * 16.0 {
        let s = points.iter().fold(Point2::default(), |acc, &p| acc + p);
        return s * (1.0 / n.max(1) as f64);
    }
    Point2::new(cx / (3.0 * a2), cy / (3.0 * a2))
}

/// Even-odd point-in-polygon test (PNPOLY crossing rule).
pub fn point_in_polygon(p: Point2, points: &[Point2]) -> bool {
    let n = points.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let a = points[i];
        let b = points[j];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the segment `a`-`b`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Axis-aligned bounds `(min, max)` of a point set.
pub fn bounds(points: &[Point2]) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, touching included.
pub fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// First pair of intersecting non-adjacent edges, if any. Adjacent edges
/// that fold back onto each other are reported as well.
fn find_self_intersection(points: &[Point2]) -> Option<(usize, usize)> {
    let n = points.len();
    for i in 0..n {
        let a1 = points[i];
        let a2 = points[(i + 1) % n];
        // Adjacent edge folding back over edge i.
        let a3 = points[(i + 2) % n];
        if orient(a1, a2, a3) == 0.0 && (a3 - a2).dot(a1 - a2) > 0.0 {
            return Some((i, (i + 1) % n));
        }
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let b1 = points[j];
            let b2 = points[(j + 1) % n];
            if segments_intersect(a1, a2, b1, b2) {
                return Some((i, j));
            }
        }
    }
    None
}

/// An ordered, closed loop of image points with at least three vertices,
/// normalized to counter-clockwise order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    vertices: Vec<Point2>,
}

impl Contour {
    /// Validates and normalizes an annotation contour: drops consecutive
    /// duplicates (including a repeated closing vertex), rejects fewer than
    /// three vertices, zero area, non-finite coordinates and any
    /// self-intersection, then reorders to counter-clockwise keeping vertex 0
    /// first.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::DegenerateInput(format!(
                "non-finite vertex ({}, {})",
                p.x, p.y
            )));
        }
        let mut v: Vec<Point2> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if v.last() != Some(&p) {
                v.push(p);
            }
        }
        while v.len() > 1 && v.first() == v.last() {
            v.pop();
        }
        if v.len() < 3 {
            return Err(Error::DegenerateInput(format!(
                "contour has {} distinct vertices, need at least 3",
                v.len()
            )));
        }
        if signed_area(&v) == 0.0 {
            return Err(Error::DegenerateInput("contour has zero area".into()));
        }
        if let Some((i, j)) = find_self_intersection(&v) {
            return Err(Error::DegenerateInput(format!(
                "contour self-intersects (edges {i} and {j})"
            )));
        }
        Ok(Self::from_vertices_unchecked(v))
    }

    /// Builds a contour without the simplicity checks. Orientation is still
    /// normalized. Intended for polygons that are simple by construction.
    pub fn from_vertices_unchecked(mut vertices: Vec<Point2>) -> Self {
        if signed_area(&vertices) < 0.0 {
            vertices[1..].reverse();
        }
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point2> {
        self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        perimeter(&self.vertices)
    }

    pub fn centroid(&self) -> Point2 {
        polygon_centroid(&self.vertices)
    }

    pub fn bounds(&self) -> (Point2, Point2) {
        bounds(&self.vertices)
    }

    pub fn contains(&self, p: Point2) -> bool {
        point_in_polygon(p, &self.vertices)
    }

    /// Edge `i` as `(start, end)`, wrapping at the last vertex.
    pub fn edge(&self, i: usize) -> (Point2, Point2) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    /// Subdivides every edge so that no piece is longer than `spacing`,
    /// keeping the original vertices.
    pub fn densified(&self, spacing: f64) -> Contour {
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = self.edge(i);
            let pieces = ((a.dist(b) / spacing).ceil() as usize).max(1);
            out.push(a);
            for k in 1..pieces {
                out.push(a.lerp(b, k as f64 / pieces as f64));
            }
        }
        Contour { vertices: out }
    }
}
