use super::orientation::{orientation_bin, validate_angle, wrapped_angle_diff, ORIENTATION_BINS};
use super::{CellEntry, DetectionTensor};
use crate::error::{Error, Result};

/// Loss weighting; `lambda_coord` scales the geometry terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub lambda_coord: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { lambda_coord: 5.0 }
    }
}

impl LossWeights {
    fn validate(&self) -> Result<()> {
        if !(self.lambda_coord > 0.0 && self.lambda_coord.is_finite()) {
            return Err(Error::Config(format!("lambda_coord must be positive, got {}", self.lambda_coord)));
        }
        Ok(())
    }
}

/// A cross-entropy value together with the entropy of its target, the
/// smallest value any prediction can reach. `excess()` is zero exactly at a
/// perfect prediction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CrossEntropy {
    pub raw: f64,
    pub floor: f64,
}

impl CrossEntropy {
    pub fn excess(&self) -> f64 {
        self.raw - self.floor
    }

    fn add(&mut self, target: f64, pred: f64) {
        self.raw -= xlogy(target, pred);
        self.floor -= xlogy(target, target);
    }
}

// Probabilities are clamped away from zero inside logarithms.
const LOG_EPS: f64 = 1e-12;

/// `t·ln p` with `0·ln 0 = 0`.
fn xlogy(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * p.max(LOG_EPS).ln()
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteInput(format!("{name} = {v}")))
    }
}

fn probability(name: &str, v: f64) -> Result<f64> {
    finite(name, v)?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::NonFiniteInput(format!("{name} = {v} is not a probability")));
    }
    Ok(v)
}

fn pairs<'a>(pred: &'a DetectionTensor, target: &'a DetectionTensor) -> Result<impl Iterator<Item = (usize, &'a CellEntry, &'a CellEntry)>> {
    target.check_conformant(pred)?;
    Ok(target.active_indices().map(move |k| (k, &pred.entries[k], &target.entries[k])))
}

/// Center offsets: `λ Σ 1ᵢⱼ [(x - x̂)² + (y - ŷ)²]`. Gradient with respect to
/// the predicted `(x̂, ŷ)` of every entry.
pub fn loss_xy(pred: &DetectionTensor, target: &DetectionTensor, w: &LossWeights) -> Result<(f64, Vec<[f64; 2]>)> {
    w.validate()?;
    let l = w.lambda_coord;
    let mut grad = vec![[0.0; 2]; pred.entries.len()];
    let mut sum = 0.0;
    for (k, p, t) in pairs(pred, target)? {
        let dx = finite("x", t.x)? - finite("x̂", p.x)?;
        let dy = finite("y", t.y)? - finite("ŷ", p.y)?;
        sum += dx * dx + dy * dy;
        grad[k] = [-2.0 * l * dx, -2.0 * l * dy];
    }
    Ok((l * sum, grad))
}

fn sqrt_size(name: &str, v: f64) -> Result<f64> {
    if !(finite(name, v)? >= 0.0) {
        return Err(Error::NonFiniteInput(format!("{name} = {v} is negative")));
    }
    Ok(v.sqrt())
}

/// Sizes: `λ Σ 1ᵢⱼ [(√w - √ŵ)² + (√h - √ĥ)²]`. Gradient with respect to
/// `(ŵ, ĥ)`; undefined at zero predicted size.
pub fn loss_wh(pred: &DetectionTensor, target: &DetectionTensor, w: &LossWeights) -> Result<(f64, Vec<[f64; 2]>)> {
    w.validate()?;
    let l = w.lambda_coord;
    let mut grad = vec![[0.0; 2]; pred.entries.len()];
    let mut sum = 0.0;
    for (k, p, t) in pairs(pred, target)? {
        let (sw, sh) = (sqrt_size("w", t.w)?, sqrt_size("h", t.h)?);
        let (pw, ph) = (sqrt_size("ŵ", p.w)?, sqrt_size("ĥ", p.h)?);
        sum += (sw - pw).powi(2) + (sh - ph).powi(2);
        grad[k] = [l * (pw - sw) / pw, l * (ph - sh) / ph];
    }
    Ok((l * sum, grad))
}

/// Binary cross-entropy of objectness over every entry.
pub fn loss_obj(pred: &DetectionTensor, target: &DetectionTensor) -> Result<CrossEntropy> {
    target.check_conformant(pred)?;
    let mut ce = CrossEntropy::default();
    for (p, t) in pred.entries.iter().zip(&target.entries) {
        let (c, ch) = (probability("C", t.objectness)?, probability("Ĉ", p.objectness)?);
        ce.add(c, ch);
        ce.add(1.0 - c, 1.0 - ch);
    }
    Ok(ce)
}

/// Categorical cross-entropy of class scores on assigned entries.
pub fn loss_class(pred: &DetectionTensor, target: &DetectionTensor) -> Result<CrossEntropy> {
    let mut ce = CrossEntropy::default();
    for (_, p, t) in pairs(pred, target)? {
        if p.class_probs.len() != t.class_probs.len() {
            return Err(Error::DimensionMismatch((t.class_probs.len(), 1), (p.class_probs.len(), 1)));
        }
        for (&c, &ch) in t.class_probs.iter().zip(&p.class_probs) {
            ce.add(probability("c", c)?, probability("ĉ", ch)?);
        }
    }
    Ok(ce)
}

/// `d(-t·ln p)/dp`, zero where the logarithm is clamped.
fn dxlogy(t: f64, p: f64) -> f64 {
    if t == 0.0 || p < LOG_EPS {
        0.0
    } else {
        -t / p
    }
}

/// Gradient of [`loss_obj`] with respect to every `Ĉ`.
pub fn loss_obj_grad(pred: &DetectionTensor, target: &DetectionTensor) -> Result<Vec<f64>> {
    target.check_conformant(pred)?;
    pred.entries
        .iter()
        .zip(&target.entries)
        .map(|(p, t)| {
            let (c, ch) = (probability("C", t.objectness)?, probability("Ĉ", p.objectness)?);
            Ok(dxlogy(c, ch) - dxlogy(1.0 - c, 1.0 - ch))
        })
        .collect()
}

/// Gradient of [`loss_class`] with respect to every `ĉ`.
pub fn loss_class_grad(pred: &DetectionTensor, target: &DetectionTensor) -> Result<Vec<Vec<f64>>> {
    let mut grad: Vec<Vec<f64>> = pred.entries.iter().map(|e| vec![0.0; e.class_probs.len()]).collect();
    for (k, p, t) in pairs(pred, target)? {
        if p.class_probs.len() != t.class_probs.len() {
            return Err(Error::DimensionMismatch((t.class_probs.len(), 1), (p.class_probs.len(), 1)));
        }
        for (j, (&c, &ch)) in t.class_probs.iter().zip(&p.class_probs).enumerate() {
            grad[k][j] = dxlogy(probability("c", c)?, probability("ĉ", ch)?);
        }
    }
    Ok(grad)
}

/// The four box sub-losses and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxLoss {
    pub xy: f64,
    pub wh: f64,
    pub obj: CrossEntropy,
    pub class: CrossEntropy,
}

impl BoxLoss {
    pub fn total(&self) -> f64 {
        self.xy + self.wh + self.obj.raw + self.class.raw
    }

    /// Total minus the entropy floors of the cross-entropy terms.
    pub fn excess(&self) -> f64 {
        self.xy + self.wh + self.obj.excess() + self.class.excess()
    }
}

pub fn loss_box(pred: &DetectionTensor, target: &DetectionTensor, w: &LossWeights) -> Result<BoxLoss> {
    Ok(BoxLoss {
        xy: loss_xy(pred, target, w)?.0,
        wh: loss_wh(pred, target, w)?.0,
        obj: loss_obj(pred, target)?,
        class: loss_class(pred, target)?,
    })
}

/// Orientation regression `Σ 1ᵢⱼ (θ - θ̂)²` in degrees². With `wrapped` the
/// difference is folded into [-90, 90) first, removing the jump at ±90°.
/// Gradient with respect to each `θ̂`.
pub fn loss_orientation_regression(pred: &DetectionTensor, target: &DetectionTensor, wrapped: bool) -> Result<(f64, Vec<f64>)> {
    let mut grad = vec![0.0; pred.entries.len()];
    let mut sum = 0.0;
    for (k, p, t) in pairs(pred, target)? {
        validate_angle(t.angle_deg)?;
        validate_angle(p.angle_deg)?;
        let d = if wrapped { wrapped_angle_diff(t.angle_deg, p.angle_deg) } else { t.angle_deg - p.angle_deg };
        sum += d * d;
        grad[k] = -2.0 * d;
    }
    Ok((sum, grad))
}

/// Cross-entropy over the 18 orientation bins; the target bin is one-hot.
pub fn loss_orientation_classification(pred: &DetectionTensor, target: &DetectionTensor) -> Result<CrossEntropy> {
    let mut ce = CrossEntropy::default();
    for (_, p, t) in pairs(pred, target)? {
        let bin = orientation_bin(t.angle_deg)?;
        if p.angle_probs.len() != ORIENTATION_BINS {
            return Err(Error::DimensionMismatch((ORIENTATION_BINS, 1), (p.angle_probs.len(), 1)));
        }
        ce.add(1.0, probability("p(bin)", p.angle_probs[bin])?);
    }
    Ok(ce)
}

/// Gradient of [`loss_orientation_classification`] with respect to every
/// bin probability.
pub fn loss_orientation_classification_grad(pred: &DetectionTensor, target: &DetectionTensor) -> Result<Vec<Vec<f64>>> {
    let mut grad: Vec<Vec<f64>> = pred.entries.iter().map(|e| vec![0.0; e.angle_probs.len()]).collect();
    for (k, p, t) in pairs(pred, target)? {
        let bin = orientation_bin(t.angle_deg)?;
        if p.angle_probs.len() != ORIENTATION_BINS {
            return Err(Error::DimensionMismatch((ORIENTATION_BINS, 1), (p.angle_probs.len(), 1)));
        }
        grad[k][bin] = dxlogy(1.0, probability("p(bin)", p.angle_probs[bin])?);
    }
    Ok(grad)
}

/// Area term `λ Σ 1ᵢⱼ (a - â)²` with gradient with respect to each `â`.
pub fn loss_area(pred: &DetectionTensor, target: &DetectionTensor, w: &LossWeights) -> Result<(f64, Vec<f64>)> {
    w.validate()?;
    let l = w.lambda_coord;
    let mut grad = vec![0.0; pred.entries.len()];
    let mut sum = 0.0;
    for (k, p, t) in pairs(pred, target)? {
        let (a, ah) = (finite("a", t.area)?, finite("â", p.area)?);
        if a < 0.0 || ah < 0.0 {
            return Err(Error::NonFiniteInput(format!("negative area {a} / {ah}")));
        }
        sum += (a - ah).powi(2);
        grad[k] = -2.0 * l * (a - ah);
    }
    Ok((l * sum, grad))
}

fn sector_pairs<'a>(p: &'a CellEntry, t: &'a CellEntry) -> Result<impl Iterator<Item = (usize, &'a super::SectorParams, &'a super::SectorParams)>> {
    if p.sectors.len() != t.sectors.len() {
        return Err(Error::DimensionMismatch((t.sectors.len(), 1), (p.sectors.len(), 1)));
    }
    Ok(p.sectors.iter().zip(&t.sectors).enumerate().map(|(j, (a, b))| (j, a, b)))
}

/// Polar coordinates `Σᵢ Σⱼ α̂ᵢⱼ [(r - r̂)² + (θ - θ̂)²]`, θ in radians.
/// Gradient per entry and sector with respect to `(r̂, θ̂, α̂)`.
pub fn loss_cods(pred: &DetectionTensor, target: &DetectionTensor) -> Result<(f64, Vec<Vec<[f64; 3]>>)> {
    let mut grad: Vec<Vec<[f64; 3]>> = pred.entries.iter().map(|e| vec![[0.0; 3]; e.sectors.len()]).collect();
    let mut sum = 0.0;
    for (k, p, t) in pairs(pred, target)? {
        for (j, ps, ts) in sector_pairs(p, t)? {
            let dr = finite("r", ts.r)? - finite("r̂", ps.r)?;
            let dt = finite("θ", ts.theta)? - finite("θ̂", ps.theta)?;
            let a = finite("α̂", ps.alpha)?;
            let sq = dr * dr + dt * dt;
            sum += a * sq;
            grad[k][j] = [-2.0 * a * dr, -2.0 * a * dt, sq];
        }
    }
    Ok((sum, grad))
}

/// Vertex presence `-Σ α log α̂`; every `α̂` must lie in (0, 1].
pub fn loss_mask(pred: &DetectionTensor, target: &DetectionTensor) -> Result<CrossEntropy> {
    let mut ce = CrossEntropy::default();
    for (_, p, t) in pairs(pred, target)? {
        for (_, ps, ts) in sector_pairs(p, t)? {
            let ah = finite("α̂", ps.alpha)?;
            if !(ah > 0.0 && ah <= 1.0) {
                return Err(Error::NonFiniteInput(format!("α̂ = {ah} outside (0, 1]")));
            }
            ce.add(finite("α", ts.alpha)?, ah);
        }
    }
    Ok(ce)
}

/// Gradient of [`loss_mask`] with respect to every `α̂`.
pub fn loss_mask_grad(pred: &DetectionTensor, target: &DetectionTensor) -> Result<Vec<Vec<f64>>> {
    loss_mask(pred, target)?;
    let mut grad: Vec<Vec<f64>> = pred.entries.iter().map(|e| vec![0.0; e.sectors.len()]).collect();
    for (k, p, t) in pairs(pred, target)? {
        for (j, ps, ts) in sector_pairs(p, t)? {
            grad[k][j] = dxlogy(ts.alpha, ps.alpha);
        }
    }
    Ok(grad)
}

/// Polar polygon loss: coordinate and mask terms plus the center,
/// objectness and class terms of the box loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarLoss {
    pub cods: f64,
    pub mask: CrossEntropy,
    pub xy: f64,
    pub obj: CrossEntropy,
    pub class: CrossEntropy,
}

impl PolarLoss {
    pub fn total(&self) -> f64 {
        self.cods + self.mask.raw + self.xy + self.obj.raw + self.class.raw
    }

    pub fn excess(&self) -> f64 {
        self.cods + self.mask.excess() + self.xy + self.obj.excess() + self.class.excess()
    }
}

pub fn loss_polar_polygon(pred: &DetectionTensor, target: &DetectionTensor, n_sectors: usize, w: &LossWeights) -> Result<PolarLoss> {
    for (_, p, t) in pairs(pred, target)? {
        if t.sectors.len() != n_sectors || p.sectors.len() != n_sectors {
            return Err(Error::DimensionMismatch((n_sectors, 1), (p.sectors.len(), t.sectors.len())));
        }
    }
    Ok(PolarLoss {
        cods: loss_cods(pred, target)?.0,
        mask: loss_mask(pred, target)?,
        xy: loss_xy(pred, target, w)?.0,
        obj: loss_obj(pred, target)?,
        class: loss_class(pred, target)?,
    })
}
