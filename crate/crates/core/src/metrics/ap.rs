use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// A scored prediction as a closed polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedInstance {
    pub image_id: String,
    pub class: usize,
    pub confidence: f64,
    pub points: Vec<Point2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthInstance {
    pub image_id: String,
    pub class: usize,
    pub points: Vec<Point2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassAp {
    pub ap: f64,
    pub n_ground_truth: usize,
    pub n_predictions: usize,
}

/// A true positive: prediction index, ground-truth index and their IoU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub prediction: usize,
    pub ground_truth: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApResult {
    /// Classes with at least one ground-truth instance.
    pub per_class: BTreeMap<usize, ClassAp>,
    /// Mean over `per_class`; `None` when there is no ground truth at all.
    pub map: Option<f64>,
    pub matches: Vec<MatchRecord>,
}

/// Average precision at `iou_threshold` with all-point interpolation.
///
/// Predictions are visited by descending confidence (input order on ties).
/// Each one is matched to the unmatched ground truth of the same image and
/// class with the highest IoU, provided that IoU reaches the threshold;
/// otherwise it is a false positive. `iou_fn` is only called for pairs
/// sharing image and class.
pub fn average_precision<F>(
    predictions: &[PredictedInstance],
    ground_truth: &[GroundTruthInstance],
    iou_threshold: f64,
    iou_fn: F,
) -> Result<ApResult>
where
    F: Fn(&[Point2], &[Point2]) -> Result<f64> + Sync,
{
    if !(0.0..=1.0).contains(&iou_threshold) {
        return Err(Error::Config(format!("IoU threshold {iou_threshold} outside [0, 1]")));
    }
    if let Some(p) = predictions.iter().find(|p| !p.confidence.is_finite()) {
        return Err(Error::NonFiniteInput(format!("confidence {}", p.confidence)));
    }
    let mut gt_by_key: BTreeMap<(&str, usize), Vec<usize>> = BTreeMap::new();
    for (i, g) in ground_truth.iter().enumerate() {
        gt_by_key.entry((g.image_id.as_str(), g.class)).or_default().push(i);
    }
    // IoU of every prediction against its candidate ground truths.
    let candidates: Vec<Vec<(usize, f64)>> = predictions
        .par_iter()
        .map(|p| {
            let Some(gts) = gt_by_key.get(&(p.image_id.as_str(), p.class)) else {
                return Ok(Vec::new());
            };
            gts.iter().map(|&g| Ok((g, iou_fn(&p.points, &ground_truth[g].points)?))).collect()
        })
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..predictions.len()).collect();
    order.sort_by(|&a, &b| predictions[b].confidence.total_cmp(&predictions[a].confidence).then(a.cmp(&b)));

    let mut n_gt: BTreeMap<usize, usize> = BTreeMap::new();
    for g in ground_truth {
        *n_gt.entry(g.class).or_insert(0) += 1;
    }
    let mut matched = vec![false; ground_truth.len()];
    let mut flags: BTreeMap<usize, Vec<bool>> = BTreeMap::new();
    let mut matches = Vec::new();
    for &p in &order {
        let mut best: Option<(usize, f64)> = None;
        for &(g, iou) in &candidates[p] {
            if !matched[g] && iou >= iou_threshold && best.map_or(true, |(_, b)| iou > b) {
                best = Some((g, iou));
            }
        }
        if let Some((g, iou)) = best {
            matched[g] = true;
            matches.push(MatchRecord { prediction: p, ground_truth: g, iou });
        }
        flags.entry(predictions[p].class).or_default().push(best.is_some());
    }

    let per_class: BTreeMap<usize, ClassAp> = n_gt
        .iter()
        .map(|(&class, &n)| {
            let tp = flags.get(&class).map(Vec::as_slice).unwrap_or(&[]);
            (class, ClassAp { ap: all_point_ap(tp, n), n_ground_truth: n, n_predictions: tp.len() })
        })
        .collect();
    let map = (!per_class.is_empty()).then(|| per_class.values().map(|c| c.ap).sum::<f64>() / per_class.len() as f64);
    Ok(ApResult { per_class, map, matches })
}

/// Area under the monotone precision envelope for TP flags in rank order.
fn all_point_ap(tp: &[bool], n_gt: usize) -> f64 {
    if n_gt == 0 {
        return 0.0;
    }
    let mut recall = Vec::with_capacity(tp.len());
    let mut precision = Vec::with_capacity(tp.len());
    let mut hits = 0usize;
    for (k, &t) in tp.iter().enumerate() {
        hits += t as usize;
        recall.push(hits as f64 / n_gt as f64);
        precision.push(hits as f64 / (k + 1) as f64);
    }
    for k in (0..precision.len().saturating_sub(1)).rev() {
        precision[k] = precision[k].max(precision[k + 1]);
    }
    let mut ap = 0.0;
    let mut prev = 0.0;
    for (r, p) in recall.iter().zip(&precision) {
        ap += (r - prev) * p;
        prev = *r;
    }
    ap
}
