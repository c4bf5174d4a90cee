//! Evaluation: representation capacity (mask mIoU per camera), the
//! vertex-count study and detection average precision.

mod ap;

pub use ap::{average_precision, ApResult, ClassAp, GroundTruthInstance, MatchRecord, PredictedInstance};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::camera::CameraId;
use crate::error::{Error, Result};
use crate::fitting::{
    fit_curved_box_from, fit_ellipse, fit_oriented_box_on_mask, fit_standard_box, CurvedBoxSearchConfig,
};
use crate::geometry::{polygon_mask_iou, rasterize_clipped, BinaryMask, Contour, GridSpec2D};
use crate::sampling::{sample_adaptive, sample_uniform_perimeter, AdaptiveSamplingConfig};
use crate::shapes::{param_count, shape_points, Shape, ShapeKind, ARC_TOLERANCE};

/// A representation evaluated by the capacity harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Representation {
    Standard,
    Curved,
    Oriented,
    Ellipse,
    /// Vertex polygon with `n` vertices, uniform along the perimeter or
    /// curvature-adaptive.
    Polygon { n: usize, adaptive: bool },
}

impl Representation {
    /// Rows of the capacity table, in report order.
    pub const TABLE: [Representation; 7] = [
        Representation::Standard,
        Representation::Curved,
        Representation::Oriented,
        Representation::Ellipse,
        Representation::Polygon { n: 4, adaptive: false },
        Representation::Polygon { n: 24, adaptive: false },
        Representation::Polygon { n: 24, adaptive: true },
    ];

    pub fn shape_kind(self) -> ShapeKind {
        match self {
            Representation::Standard => ShapeKind::Standard,
            Representation::Curved => ShapeKind::Curved,
            Representation::Oriented => ShapeKind::Oriented,
            Representation::Ellipse => ShapeKind::Ellipse,
            Representation::Polygon { n, .. } => ShapeKind::Polygon(n),
        }
    }

    pub fn params(self) -> usize {
        param_count(self.shape_kind())
    }

    /// Human-readable row label.
    pub fn label(self) -> String {
        match self {
            Representation::Standard => "Standard box".into(),
            Representation::Curved => "Curved box".into(),
            Representation::Oriented => "Oriented box".into(),
            Representation::Ellipse => "Ellipse".into(),
            Representation::Polygon { n, adaptive: false } => format!("{n}-sided polygon (uniform)"),
            Representation::Polygon { n, adaptive: true } => format!("{n}-sided polygon (adaptive)"),
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::Standard => f.write_str("standard"),
            Representation::Curved => f.write_str("curved"),
            Representation::Oriented => f.write_str("oriented"),
            Representation::Ellipse => f.write_str("ellipse"),
            Representation::Polygon { n, adaptive: false } => write!(f, "poly{n}"),
            Representation::Polygon { n, adaptive: true } => write!(f, "poly{n}-adaptive"),
        }
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown representation '{s}'"));
        Ok(match s {
            "standard" => Representation::Standard,
            "curved" => Representation::Curved,
            "oriented" => Representation::Oriented,
            "ellipse" => Representation::Ellipse,
            _ => {
                let rest = s.strip_prefix("poly").ok_or_else(bad)?;
                let (num, adaptive) = match rest.strip_suffix("-adaptive") {
                    Some(n) => (n, true),
                    None => (rest, false),
                };
                let n: usize = num.parse().map_err(|_| bad())?;
                if n < 3 || (adaptive && n < 4) {
                    return Err(bad());
                }
                Representation::Polygon { n, adaptive }
            }
        })
    }
}

impl Serialize for Representation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Representation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One annotated image as seen by the evaluators.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalImage {
    pub image_id: String,
    pub camera: CameraId,
    pub width: usize,
    pub height: usize,
    pub contours: Vec<Contour>,
}

/// Shared fitting settings.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitSettings {
    pub curved: CurvedBoxSearchConfig,
}

/// Ground-truth mask of one object on its image grid.
pub struct ObjectMask {
    pub grid: GridSpec2D,
    pub mask: BinaryMask,
    pub count: usize,
}

impl ObjectMask {
    pub fn new(contour: &Contour, width: usize, height: usize) -> Result<Self> {
        let grid = GridSpec2D::native(width, height);
        let mask = rasterize_clipped(contour.vertices(), &grid)?;
        let count = mask.count();
        if count == 0 {
            return Err(Error::DegenerateInput("contour covers no pixel centers".into()));
        }
        Ok(Self { grid, mask, count })
    }

    pub fn iou(&self, shape: &Shape) -> Result<f64> {
        polygon_mask_iou(&shape_points(shape, ARC_TOLERANCE), &self.grid, &self.mask, self.count)
    }
}

/// Fits every representation in `reps` to one contour. The curved box is
/// searched from the oriented box so that its IoU never falls below it.
pub fn fit_representations(
    contour: &Contour,
    gt: &ObjectMask,
    reps: &[Representation],
    settings: &FitSettings,
) -> Vec<Result<Shape>> {
    let mut oriented = None;
    let mut oriented_box = |contour: &Contour| -> Result<_> {
        if oriented.is_none() {
            oriented = Some(fit_oriented_box_on_mask(contour, &gt.grid, &gt.mask));
        }
        oriented.clone().unwrap()
    };
    reps.iter()
        .map(|&rep| {
            Ok(match rep {
                Representation::Standard => Shape::Standard(fit_standard_box(contour)?),
                Representation::Oriented => Shape::Oriented(oriented_box(contour)?),
                Representation::Curved => {
                    let o = oriented_box(contour)?;
                    Shape::Curved(fit_curved_box_from(contour, &o, &gt.grid, &gt.mask, &settings.curved)?)
                }
                Representation::Ellipse => Shape::Ellipse(fit_ellipse(contour)?),
                Representation::Polygon { n, adaptive: false } => Shape::Polygon(sample_uniform_perimeter(contour, n)?),
                Representation::Polygon { n, adaptive: true } => {
                    Shape::Polygon(sample_adaptive(contour, &AdaptiveSamplingConfig::new(n))?)
                }
            })
        })
        .collect()
}

/// IoU of each representation against one object's mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectScores {
    pub image_id: String,
    pub object: usize,
    pub camera: CameraId,
    pub ious: Vec<Result<f64>>,
}

/// Per-object IoUs for every representation, ordered by image then object.
pub fn object_scores(images: &[EvalImage], reps: &[Representation], settings: &FitSettings) -> Vec<ObjectScores> {
    let mut out: Vec<ObjectScores> = images
        .par_iter()
        .flat_map_iter(|img| {
            img.contours.iter().enumerate().map(move |(k, c)| {
                let ious = match ObjectMask::new(c, img.width, img.height) {
                    Ok(gt) => fit_representations(c, &gt, reps, settings)
                        .into_iter()
                        .map(|s| s.and_then(|s| gt.iou(&s)))
                        .collect(),
                    Err(e) => vec![Err(e); reps.len()],
                };
                ObjectScores { image_id: img.image_id.clone(), object: k, camera: img.camera, ious }
            })
        })
        .collect();
    out.sort_by(|a, b| a.image_id.cmp(&b.image_id).then(a.object.cmp(&b.object)));
    out
}

/// Running IoU sum for one camera.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CameraStat {
    pub iou_sum: f64,
    pub count: usize,
}

impl CameraStat {
    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.iou_sum / self.count as f64)
    }
}

/// One row of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub representation: Representation,
    pub params: usize,
    pub per_camera: BTreeMap<CameraId, CameraStat>,
    /// Objects excluded because the fit failed.
    pub failures: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<f64>,
}

impl ReportRow {
    pub fn new(representation: Representation) -> Self {
        Self { representation, params: representation.params(), per_camera: BTreeMap::new(), failures: 0, map: None }
    }

    pub fn camera_miou(&self, camera: CameraId) -> Option<f64> {
        self.per_camera.get(&camera).and_then(CameraStat::mean)
    }

    /// Object-weighted mean over all cameras.
    pub fn miou(&self) -> Option<f64> {
        let (s, n) = self.per_camera.values().fold((0.0, 0), |(s, n), c| (s + c.iou_sum, n + c.count));
        (n > 0).then(|| s / n as f64)
    }
}

/// A capacity or detection table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub title: String,
    pub rows: Vec<ReportRow>,
    /// Ground-truth objects per camera.
    pub object_counts: BTreeMap<CameraId, usize>,
}

impl EvaluationReport {
    pub fn row(&self, rep: Representation) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.representation == rep)
    }

    pub fn miou(&self, rep: Representation) -> Option<f64> {
        self.row(rep).and_then(ReportRow::miou)
    }
}

/// Mean mask IoU per camera and representation.
pub fn representation_miou(images: &[EvalImage], reps: &[Representation], settings: &FitSettings) -> EvaluationReport {
    let scores = object_scores(images, reps, settings);
    aggregate("Representation capacity (mIoU)", reps, images, &scores)
}

/// Builds a report from per-object scores.
pub fn aggregate(title: &str, reps: &[Representation], images: &[EvalImage], scores: &[ObjectScores]) -> EvaluationReport {
    let mut object_counts = BTreeMap::new();
    for img in images {
        *object_counts.entry(img.camera).or_insert(0) += img.contours.len();
    }
    let mut rows: Vec<ReportRow> = reps.iter().map(|&r| ReportRow::new(r)).collect();
    for s in scores {
        for (row, iou) in rows.iter_mut().zip(&s.ious) {
            match iou {
                Ok(v) => {
                    let c = row.per_camera.entry(s.camera).or_default();
                    c.iou_sum += v;
                    c.count += 1;
                }
                Err(e) => {
                    warn!("{} object {} ({}): {e}", s.image_id, s.object, row.representation);
                    row.failures += 1;
                }
            }
        }
    }
    EvaluationReport { title: title.into(), rows, object_counts }
}

/// Vertex counts of the vertex study.
pub const VERTEX_STUDY_COUNTS: [usize; 6] = [4, 12, 24, 36, 60, 120];

/// Result of [`vertex_count_study`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexStudy {
    pub report: EvaluationReport,
    /// True when mIoU never drops by more than `tolerance` as N grows.
    pub monotone: bool,
    pub tolerance: f64,
}

/// Uniform-perimeter polygons at each N; mIoU should rise with N.
pub fn vertex_count_study(images: &[EvalImage], counts: &[usize], tolerance: f64) -> VertexStudy {
    let reps: Vec<Representation> = counts.iter().map(|&n| Representation::Polygon { n, adaptive: false }).collect();
    let scores = object_scores(images, &reps, &FitSettings::default());
    let report = aggregate("Number of polygon vertices (mIoU)", &reps, images, &scores);
    let values: Vec<f64> = report.rows.iter().filter_map(ReportRow::miou).collect();
    VertexStudy { monotone: non_decreasing_within(&values, tolerance), report, tolerance }
}

/// True when no later value falls more than `tolerance` below an earlier one.
pub fn non_decreasing_within(values: &[f64], tolerance: f64) -> bool {
    let mut best = f64::NEG_INFINITY;
    for &v in values {
        if v < best - tolerance {
            return false;
        }
        best = best.max(v);
    }
    true
}
