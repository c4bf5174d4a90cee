//! Best-fit procedures from an instance contour to each box-like
//! representation.

use crate::error::{Error, Result};
use std::f64::consts::{PI, TAU};

use crate::geometry::{min_area_rect, point_segment_distance, min_enclosing_ellipse, polygon_mask_counts, BinaryMask, Contour, GridSpec2D, Point2};
use crate::shapes::{curved_box_points, oriented_corners, CurvedBox, EllipseShape, OrientedBox, StandardBox, ARC_TOLERANCE};

/// Candidate grid for [`fit_curved_box`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvedBoxSearchConfig {
    /// Candidate circle centers on each side of the box.
    pub n_center_candidates: usize,
    /// Farthest candidate from the box center, px. `None` uses eight times
    /// the box diagonal.
    pub max_center_distance: Option<f64>,
}

impl Default for CurvedBoxSearchConfig {
    fn default() -> Self {
        Self { n_center_candidates: 64, max_center_distance: None }
    }
}

impl CurvedBoxSearchConfig {
    fn validate(&self) -> Result<()> {
        if self.n_center_candidates < 2 {
            return Err(Error::Config(format!(
                "curved box search needs at least 2 candidates, got {}",
                self.n_center_candidates
            )));
        }
        if let Some(d) = self.max_center_distance {
            if !(d > 0.0) {
                return Err(Error::Config(format!("max_center_distance must be positive, got {d}")));
            }
        }
        Ok(())
    }
}

/// Tight axis-aligned box around all contour vertices.
pub fn fit_standard_box(contour: &Contour) -> Result<StandardBox> {
    let (lo, hi) = contour.bounds();
    let (w, h) = (hi.x - lo.x, hi.y - lo.y);
    if !(w > 0.0 && h > 0.0) {
        return Err(Error::DegenerateInput(format!("contour extent {w} x {h}")));
    }
    Ok(StandardBox { center: lo.lerp(hi, 0.5), width: w, height: h })
}

/// Minimum-area enclosing rectangle.
pub fn fit_oriented_box(contour: &Contour) -> Result<OrientedBox> {
    let r = min_area_rect(contour)?;
    if !(r.width > 0.0 && r.height > 0.0) {
        return Err(Error::DegenerateInput("contour has zero width".into()));
    }
    Ok(OrientedBox { center: r.center, width: r.width, height: r.height, angle_deg: r.angle_deg })
}

fn box_iou(points: &[Point2], grid: &GridSpec2D, mask: &BinaryMask, mask_count: usize) -> Result<f64> {
    let (inter, count) = polygon_mask_counts(points, grid, mask)?;
    let union = count + mask_count - inter;
    Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}

/// The enclosing rectangle with the better mask IoU out of the
/// minimum-area rectangle and the axis-aligned box. The min-area rectangle
/// nearly always wins; the fallback only matters when pixelization reverses
/// a near tie, and it keeps IoU(oriented) >= IoU(standard) exact per object.
pub fn fit_oriented_box_on_mask(contour: &Contour, grid: &GridSpec2D, mask: &BinaryMask) -> Result<OrientedBox> {
    let rotated = fit_oriented_box(contour)?;
    let s = fit_standard_box(contour)?;
    let count = mask.count();
    let r_iou = box_iou(&oriented_corners(rotated.center, rotated.width, rotated.height, rotated.angle_deg.to_radians()), grid, mask, count)?;
    let s_iou = box_iou(&oriented_corners(s.center, s.width, s.height, 0.0), grid, mask, count)?;
    Ok(if s_iou > r_iou {
        OrientedBox { center: s.center, width: s.width, height: s.height, angle_deg: 0.0 }
    } else {
        rotated
    })
}

/// Minimum enclosing ellipse.
pub fn fit_ellipse(contour: &Contour) -> Result<EllipseShape> {
    let e = min_enclosing_ellipse(contour)?;
    if !(e.semi_minor > 0.0) {
        return Err(Error::DegenerateInput("enclosing ellipse has zero minor axis".into()));
    }
    Ok(EllipseShape { center: e.center, major: 2.0 * e.semi_major, minor: 2.0 * e.semi_minor, angle_deg: e.angle_deg })
}

/// Curved box whose circle center sits `distance` px from the box center
/// along the axis normal to the long sides, on side `sign`.
fn curved_candidate(b: &OrientedBox, distance: f64, sign: f64) -> CurvedBox {
    let (s, c) = b.angle_deg.to_radians().sin_cos();
    let (u, v) = (Point2::new(c, s), Point2::new(-s, c));
    // half length of the long sides, half distance between them, axis
    let (l, t, axis) = if b.width >= b.height { (0.5 * b.width, 0.5 * b.height, v) } else { (0.5 * b.height, 0.5 * b.width, u) };
    let circle_center = b.center + axis * (sign * distance);
    let phi = (b.center - circle_center).angle();
    let half = l.atan2(distance - t);
    CurvedBox {
        circle_center,
        r1: l.hypot(distance - t),
        r2: l.hypot(distance + t),
        theta1: phi - half,
        theta2: phi + half,
        degenerate: false,
    }
}

/// Tightest annular sector about `circle_center` enclosing every contour
/// vertex: radii from the nearest boundary point and farthest vertex, angles
/// from the angular extent around the direction `phi`. `None` when the center
/// is inside the contour or the extent reaches half a turn.
fn enclosing_candidate(contour: &Contour, circle_center: Point2, phi: f64) -> Option<CurvedBox> {
    if contour.contains(circle_center) {
        return None;
    }
    let v = contour.vertices();
    let mut r1 = f64::INFINITY;
    let mut r2 = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..v.len() {
        let (a, b) = contour.edge(i);
        r1 = r1.min(point_segment_distance(circle_center, a, b));
        let d = a - circle_center;
        r2 = r2.max(d.norm());
        let rel = (d.angle() - phi + PI).rem_euclid(TAU) - PI;
        lo = lo.min(rel);
        hi = hi.max(rel);
    }
    if !(r2 > r1 && r1 > 0.0 && hi - lo < PI) {
        return None;
    }
    Some(CurvedBox { circle_center, r1, r2, theta1: phi + lo, theta2: phi + hi, degenerate: false })
}

/// Center distances searched on each side, log-spaced over a factor of 16
/// up to the maximum.
fn candidate_distances(b: &OrientedBox, cfg: &CurvedBoxSearchConfig) -> Vec<f64> {
    let diag = b.width.hypot(b.height);
    let far = cfg.max_center_distance.unwrap_or(8.0 * diag);
    let near = (far / 16.0).max(0.5 * b.width.min(b.height) * (1.0 + 1e-6));
    let n = cfg.n_center_candidates;
    (0..n)
        .map(|k| near * (far / near).powf(k as f64 / (n - 1) as f64))
        .filter(|&d| d > 0.5 * b.width.min(b.height))
        .collect()
}

/// Curved box maximizing mask IoU. Candidate circle centers lie on the
/// box symmetry axis normal to its long sides. Each center yields two
/// annular sectors: one whose circles pass through the box corners, and the
/// tightest one enclosing the contour. The given oriented box itself (the
/// straight-edged limit) is tried first and ties keep the earlier
/// candidate, so the result never scores below `oriented`.
pub fn fit_curved_box_from(
    contour: &Contour,
    oriented: &OrientedBox,
    grid: &GridSpec2D,
    mask: &BinaryMask,
    cfg: &CurvedBoxSearchConfig,
) -> Result<CurvedBox> {
    cfg.validate()?;
    let count = mask.count();
    let mut best = CurvedBox::from_oriented(oriented);
    let mut best_iou = box_iou(&curved_box_points(&best, ARC_TOLERANCE), grid, mask, count)?;
    for sign in [1.0, -1.0] {
        for d in candidate_distances(oriented, cfg) {
            let cand = curved_candidate(oriented, d, sign);
            let phi = 0.5 * (cand.theta1 + cand.theta2);
            let tight = enclosing_candidate(contour, cand.circle_center, phi);
            for cand in std::iter::once(cand).chain(tight) {
                let iou = box_iou(&curved_box_points(&cand, ARC_TOLERANCE), grid, mask, count)?;
                if iou > best_iou {
                    best = cand;
                    best_iou = iou;
                }
            }
        }
    }
    Ok(best)
}

/// [`fit_curved_box_from`] seeded with [`fit_oriented_box_on_mask`].
pub fn fit_curved_box(contour: &Contour, grid: &GridSpec2D, mask: &BinaryMask, cfg: &CurvedBoxSearchConfig) -> Result<CurvedBox> {
    let oriented = fit_oriented_box_on_mask(contour, grid, mask)?;
    fit_curved_box_from(contour, &oriented, grid, mask, cfg)
}
