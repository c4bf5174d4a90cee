use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// IoU of two boxes sharing a center.
pub fn anchor_iou(a: (f64, f64), b: (f64, f64)) -> f64 {
    let inter = a.0.min(b.0) * a.1.min(b.1);
    let union = a.0 * a.1 + b.0 * b.1 - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

fn nearest(p: (f64, f64), centers: &[(f64, f64)]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, &c) in centers.iter().enumerate() {
        let d = 1.0 - anchor_iou(p, c);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

/// k-means over box sizes with distance `1 - IoU`, seeded k-means++.
/// Returns `k` anchors sorted by area.
pub fn kmeans_anchors(sizes: &[(f64, f64)], k: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if k == 0 || sizes.len() < k {
        return Err(Error::DegenerateInput(format!("k-means needs 1 <= k <= {}, got k={k}", sizes.len())));
    }
    if sizes.iter().any(|&(w, h)| !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite())) {
        return Err(Error::DegenerateInput("box sizes must be positive and finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = vec![sizes[rng.gen_range(0..sizes.len())]];
    while centers.len() < k {
        let d: Vec<f64> = sizes.iter().map(|&p| (1.0 - anchor_iou(p, centers[nearest(p, &centers)])).powi(2)).collect();
        let total: f64 = d.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            let mut pick = sizes.len() - 1;
            for (i, &di) in d.iter().enumerate() {
                if u < di {
                    pick = i;
                    break;
                }
                u -= di;
            }
            pick
        } else {
            rng.gen_range(0..sizes.len())
        };
        centers.push(sizes[next]);
    }
    let mut assign = vec![usize::MAX; sizes.len()];
    for _ in 0..300 {
        let new: Vec<usize> = sizes.iter().map(|&p| nearest(p, &centers)).collect();
        if new == assign {
            break;
        }
        assign = new;
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<(f64, f64)> = sizes.iter().zip(&assign).filter(|(_, &a)| a == c).map(|(&p, _)| p).collect();
            if !members.is_empty() {
                let n = members.len() as f64;
                *center = (members.iter().map(|p| p.0).sum::<f64>() / n, members.iter().map(|p| p.1).sum::<f64>() / n);
            }
        }
    }
    centers.sort_by(|a, b| (a.0 * a.1).total_cmp(&(b.0 * b.1)));
    Ok(centers)
}
