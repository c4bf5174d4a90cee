//! Detection-head numerics: grid target assignment, loss kernels with
//! analytic gradients, orientation bins, anchor clustering and
//! representation-aware NMS.
//!
//! Cell offsets `x`, `y` are in cell units within `[0, 1)`; `w`, `h` and
//! areas are pixels; orientations are degrees in `[-90, 90)`; polar sector
//! angles are radians.

mod anchors;
mod loss;
mod nms;
mod orientation;

pub use anchors::{anchor_iou, kmeans_anchors};
pub use loss::{
    loss_area, loss_box, loss_class, loss_class_grad, loss_cods, loss_mask, loss_mask_grad, loss_obj, loss_obj_grad,
    loss_orientation_classification, loss_orientation_classification_grad, loss_orientation_regression,
    loss_polar_polygon, loss_wh, loss_xy, BoxLoss, CrossEntropy, LossWeights, PolarLoss,
};
pub use nms::{nms_generalized, shape_iou, DetectionRecord};
pub use orientation::{
    bin_center, orientation_bin, orientation_bin_roundtrip, wrapped_angle_diff, BIN_WIDTH_DEG, ORIENTATION_BINS,
};

use crate::error::{Error, Result};
use crate::geometry::{bounds, Point2};
use crate::shapes::{curved_box_center, shape_area, shape_points, Shape, ARC_TOLERANCE};

/// Detection grid: `s × s` cells over a `width × height` image, `anchors.len()`
/// anchors per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub s: usize,
    pub anchors: Vec<(f64, f64)>,
    pub image_width: f64,
    pub image_height: f64,
}

impl GridSpec {
    pub fn new(s: usize, anchors: Vec<(f64, f64)>, image_width: f64, image_height: f64) -> Result<Self> {
        if s == 0 || anchors.is_empty() {
            return Err(Error::Config(format!("grid needs S >= 1 and B >= 1, got S={s} B={}", anchors.len())));
        }
        if anchors.iter().any(|&(w, h)| !(w > 0.0 && h > 0.0)) {
            return Err(Error::Config("anchor sizes must be positive".into()));
        }
        if !(image_width > 0.0 && image_height > 0.0) {
            return Err(Error::Config("image size must be positive".into()));
        }
        Ok(Self { s, anchors, image_width, image_height })
    }

    pub fn b(&self) -> usize {
        self.anchors.len()
    }

    pub fn len(&self) -> usize {
        self.s * self.s * self.b()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of `(row, col, anchor)`.
    pub fn index(&self, row: usize, col: usize, anchor: usize) -> usize {
        (row * self.s + col) * self.b() + anchor
    }

    /// Cell `(row, col)` whose half-open bounds contain `p`, plus the
    /// offset of `p` inside it.
    pub fn locate(&self, p: Point2) -> Result<((usize, usize), (f64, f64))> {
        if !(p.x >= 0.0 && p.x < self.image_width && p.y >= 0.0 && p.y < self.image_height) {
            return Err(Error::CenterOutOfImage { x: p.x, y: p.y });
        }
        let gx = p.x / self.image_width * self.s as f64;
        let gy = p.y / self.image_height * self.s as f64;
        let col = (gx.floor() as usize).min(self.s - 1);
        let row = (gy.floor() as usize).min(self.s - 1);
        Ok(((row, col), (gx - col as f64, gy - row as f64)))
    }
}

/// Polar polygon parameters of one sector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SectorParams {
    pub r: f64,
    pub theta: f64,
    pub alpha: f64,
}

/// Per-(cell, anchor) values shared by targets and predictions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellEntry {
    pub objectness: f64,
    pub class_probs: Vec<f64>,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub angle_deg: f64,
    /// Orientation bin probabilities; empty unless classification is used.
    pub angle_probs: Vec<f64>,
    pub area: f64,
    pub sectors: Vec<SectorParams>,
}

/// Dense `S²·B` tensor. In a target, `active[k]` is the indicator that an
/// object is assigned to entry `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionTensor {
    pub entries: Vec<CellEntry>,
    pub active: Vec<bool>,
}

pub type TargetTensor = DetectionTensor;
pub type PredictionTensor = DetectionTensor;

impl DetectionTensor {
    pub fn empty(grid: &GridSpec, n_classes: usize) -> Self {
        let entry = CellEntry { class_probs: vec![0.0; n_classes], ..Default::default() };
        Self { entries: vec![entry; grid.len()], active: vec![false; grid.len()] }
    }

    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().enumerate().filter(|(_, &a)| a).map(|(i, _)| i)
    }

    pub(crate) fn check_conformant(&self, other: &DetectionTensor) -> Result<()> {
        if self.entries.len() != other.entries.len() || other.active.len() != other.entries.len() {
            return Err(Error::DimensionMismatch((self.entries.len(), 1), (other.entries.len(), 1)));
        }
        Ok(())
    }
}

/// A ground-truth object for target assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthObject {
    pub shape: Shape,
    pub class: usize,
}

/// Center, size and angle used for cell/anchor assignment.
pub fn shape_box_params(shape: &Shape) -> (Point2, f64, f64, f64) {
    let aabb = |s: &Shape| {
        let (lo, hi) = bounds(&shape_points(s, ARC_TOLERANCE));
        (hi.x - lo.x, hi.y - lo.y)
    };
    match shape {
        Shape::Standard(b) => (b.center, b.width, b.height, 0.0),
        Shape::Oriented(b) => (b.center, b.width, b.height, b.angle_deg),
        Shape::Ellipse(e) => (e.center, e.major, e.minor, e.angle_deg),
        Shape::Curved(b) => match b.as_oriented() {
            Some(o) => (o.center, o.width, o.height, o.angle_deg),
            None => {
                let (w, h) = aabb(shape);
                (curved_box_center(b), w, h, 0.0)
            }
        },
        Shape::Polygon(p) => {
            let (w, h) = aabb(shape);
            (p.origin, w, h, 0.0)
        }
        Shape::Polar(p) => {
            let (w, h) = aabb(shape);
            (p.center, w, h, 0.0)
        }
    }
}

/// Assigns each object to the cell containing its center and the anchor of
/// best centered IoU (lowest index on ties). When that slot is taken the
/// next best anchor of the same cell is used; a cell with every anchor
/// taken is a [`Error::SlotConflict`].
pub fn assign_targets(objects: &[GroundTruthObject], grid: &GridSpec, n_classes: usize) -> Result<TargetTensor> {
    let mut t = DetectionTensor::empty(grid, n_classes);
    for obj in objects {
        if obj.class >= n_classes {
            return Err(Error::Config(format!("class {} out of range for {n_classes} classes", obj.class)));
        }
        let (center, w, h, angle) = shape_box_params(&obj.shape);
        let ((row, col), (ox, oy)) = grid.locate(center)?;
        let mut order: Vec<usize> = (0..grid.b()).collect();
        let ious: Vec<f64> = grid.anchors.iter().map(|&a| anchor_iou(a, (w, h))).collect();
        order.sort_by(|&i, &j| ious[j].total_cmp(&ious[i]).then(i.cmp(&j)));
        let slot = order
            .iter()
            .map(|&a| grid.index(row, col, a))
            .find(|&k| !t.active[k])
            .ok_or(Error::SlotConflict { row, col })?;
        let mut class_probs = vec![0.0; n_classes];
        class_probs[obj.class] = 1.0;
        let sectors = match &obj.shape {
            Shape::Polar(p) => p
                .sectors
                .iter()
                .map(|s| SectorParams { r: s.r, theta: s.theta, alpha: if s.alpha > 0 { 1.0 } else { 0.0 } })
                .collect(),
            _ => Vec::new(),
        };
        t.entries[slot] = CellEntry {
            objectness: 1.0,
            class_probs,
            x: ox,
            y: oy,
            w,
            h,
            angle_deg: angle,
            angle_probs: Vec::new(),
            area: shape_area(&obj.shape),
            sectors,
        };
        t.active[slot] = true;
    }
    Ok(t)
}
