use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{convex_clip_iou, is_convex, polygon_pair_iou, signed_area, Contour, Point2};
use crate::shapes::{shape_points, Shape, ARC_TOLERANCE};

/// A scored detection of any representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub shape: Shape,
    pub class: usize,
    pub confidence: f64,
}

// Raster resolution for non-convex pairs: longest side of the joint bounds.
const RASTER_LONGEST: usize = 512;

fn ccw(mut pts: Vec<Point2>) -> Vec<Point2> {
    if signed_area(&pts) < 0.0 {
        pts.reverse();
    }
    pts
}

/// IoU between two shapes. Convex pairs are clipped exactly; anything else
/// is compared on a shared raster.
pub fn shape_iou(a: &Shape, b: &Shape) -> Result<f64> {
    let pa = ccw(shape_points(a, ARC_TOLERANCE));
    let pb = ccw(shape_points(b, ARC_TOLERANCE));
    if is_convex(&pa) && is_convex(&pb) {
        return convex_clip_iou(&Contour::from_vertices_unchecked(pa), &Contour::from_vertices_unchecked(pb));
    }
    polygon_pair_iou(&pa, &pb, RASTER_LONGEST)
}

/// Greedy per-class NMS. Detections under `score_threshold` are dropped;
/// the rest are visited by confidence (input order on ties) and a detection
/// is suppressed when its IoU with an already kept one of the same class
/// exceeds `iou_threshold`.
pub fn nms_generalized(dets: &[DetectionRecord], score_threshold: f64, iou_threshold: f64) -> Result<Vec<DetectionRecord>> {
    if !(0.0..=1.0).contains(&iou_threshold) || !score_threshold.is_finite() {
        return Err(Error::Config(format!("invalid thresholds score={score_threshold} iou={iou_threshold}")));
    }
    if let Some(d) = dets.iter().find(|d| !d.confidence.is_finite()) {
        return Err(Error::NonFiniteInput(format!("confidence {}", d.confidence)));
    }
    let mut order: Vec<usize> = (0..dets.len()).filter(|&i| dets[i].confidence >= score_threshold).collect();
    order.sort_by(|&i, &j| dets[j].confidence.total_cmp(&dets[i].confidence).then(i.cmp(&j)));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let mut keep = true;
        for &k in &kept {
            if dets[k].class == dets[i].class && shape_iou(&dets[k].shape, &dets[i].shape)? > iou_threshold {
                keep = false;
                break;
            }
        }
        if keep {
            kept.push(i);
        }
    }
    Ok(kept.into_iter().map(|i| dets[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{CurvedBox, OrientedBox, StandardBox};

    fn boxed(x: f64, c: f64) -> DetectionRecord {
        DetectionRecord {
            shape: Shape::Standard(StandardBox { center: Point2::new(x, 0.0), width: 10.0, height: 10.0 }),
            class: 0,
            confidence: c,
        }
    }

    #[test]
    fn suppresses_overlaps_and_keeps_order() {
        let dets = vec![boxed(0.0, 0.6), boxed(1.0, 0.9), boxed(30.0, 0.5), boxed(2.0, 0.2)];
        let out = nms_generalized(&dets, 0.3, 0.5).unwrap();
        let conf: Vec<f64> = out.iter().map(|d| d.confidence).collect();
        assert_eq!(conf, vec![0.9, 0.5]);
        let mut other = boxed(0.0, 0.6);
        other.class = 1;
        assert_eq!(nms_generalized(&[boxed(1.0, 0.9), other], 0.0, 0.5).unwrap().len(), 2);
        assert!(nms_generalized(&dets, 0.0, 1.5).is_err());
    }

    #[test]
    fn mixed_representations() {
        let o = Shape::Oriented(OrientedBox { center: Point2::new(0.0, 0.0), width: 20.0, height: 10.0, angle_deg: 0.0 });
        let s = Shape::Standard(StandardBox { center: Point2::new(0.0, 0.0), width: 20.0, height: 10.0 });
        assert!((shape_iou(&o, &s).unwrap() - 1.0).abs() < 1e-12);
        let c = Shape::Curved(CurvedBox::from_oriented(&OrientedBox {
            center: Point2::new(0.0, 0.0),
            width: 20.0,
            height: 10.0,
            angle_deg: 0.0,
        }));
        assert!((shape_iou(&c, &s).unwrap() - 1.0).abs() < 1e-6);
    }
}
