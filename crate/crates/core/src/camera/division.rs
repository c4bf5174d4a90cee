//! Division model with a scale factor: `tan θ = r / (f · (1 + λ·r²))`.
//!
//! Written as `r·cos θ = f·sin θ·(1 + λ·r²)`, the radius on the branch that
//! starts at `r(0) = 0` is
//!
//! ```text
//! r(θ) = 2·f·sin θ / (cos θ + sqrt(cos²θ − 4·f²·λ·sin²θ))
//! ```
//!
//! which stays finite through θ = 90° whenever λ < 0. With `μ = λ·f²` the
//! radius is `f · g(θ, μ)`, linear in `f`; the fitter exploits that.

use serde::{Deserialize, Serialize};

use super::{PolynomialFisheyeModel, RadialModel};
use crate::error::{Error, Result};
use crate::geometry::Point2;

pub const DEFAULT_FIT_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivisionModel {
    /// Scale `f` in pixels.
    pub f: f64,
    /// Distortion `λ` in pixels⁻².
    pub lambda: f64,
    pub principal_point: Point2,
    pub max_field_angle: f64,
}

impl DivisionModel {
    pub fn new(f: f64, lambda: f64, principal_point: Point2, max_field_angle: f64) -> Result<Self> {
        if !(f > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidModel(format!("division model f={f}, λ={lambda}")));
        }
        Ok(Self { f, lambda, principal_point, max_field_angle })
    }

    /// Field angle of an image radius; the forward relation.
    pub fn theta_of_radius(&self, r: f64) -> f64 {
        r.atan2(self.f * (1.0 + self.lambda * r * r))
    }
}

/// Normalized radius `g = r / f` for `μ = λ·f²`.
fn unit_radius(theta: f64, mu: f64) -> Option<f64> {
    let (s, c) = theta.sin_cos();
    let disc = c * c - 4.0 * mu * s * s;
    if disc < 0.0 {
        return None;
    }
    let den = c + disc.sqrt();
    if !(den > 0.0) {
        return if s == 0.0 { Some(0.0) } else { None };
    }
    Some(2.0 * s / den)
}

/// `∂g/∂μ`.
fn unit_radius_dmu(theta: f64, mu: f64) -> Option<f64> {
    let (s, c) = theta.sin_cos();
    let disc = c * c - 4.0 * mu * s * s;
    if disc <= 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let den = c + root;
    if !(den > 0.0) {
        return None;
    }
    Some(4.0 * s * s * s / (den * den * root))
}

/// Image radius for field angle `theta` on the continuous branch from
/// `r(0) = 0`.
pub fn invert_division_radius(model: &DivisionModel, theta: f64) -> Result<f64> {
    if !(theta >= 0.0) || theta >= std::f64::consts::PI {
        return Err(Error::Unrepresentable(theta));
    }
    let mu = model.lambda * model.f * model.f;
    unit_radius(theta, mu).map(|g| model.f * g).ok_or(Error::Unrepresentable(theta))
}

impl RadialModel for DivisionModel {
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
        invert_division_radius(self, theta)
    }
}

/// `n` evenly spaced field angles covering `[0, max]`.
pub fn uniform_theta_grid(max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| max * k as f64 / (n - 1).max(1) as f64).collect()
}

/// Outcome of [`fit_division_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct DivisionFit {
    pub model: DivisionModel,
    pub thetas: Vec<f64>,
    /// Signed radial error `r_div − r_poly` in pixels, one per field angle.
    pub residuals: Vec<f64>,
}

impl DivisionFit {
    pub fn max_abs_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn rms_residual(&self) -> f64 {
        (self.residuals.iter().map(|r| r * r).sum::<f64>() / self.residuals.len() as f64).sqrt()
    }
}

struct Problem<'a> {
    thetas: &'a [f64],
    target: Vec<f64>,
}

impl Problem<'_> {
    fn unit_radii(&self, mu: f64) -> Option<Vec<f64>> {
        self.thetas.iter().map(|&t| unit_radius(t, mu)).collect()
    }

    fn cost(&self, f: f64, mu: f64) -> f64 {
        match self.unit_radii(mu) {
            Some(g) => g.iter().zip(&self.target).map(|(g, r)| (f * g - r).powi(2)).sum(),
            None => f64::INFINITY,
        }
    }

    /// Optimal scale for a fixed `μ` and its cost.
    fn profile(&self, mu: f64) -> Option<(f64, f64)> {
        let g = self.unit_radii(mu)?;
        let gg: f64 = g.iter().map(|v| v * v).sum();
        if !(gg > 0.0) {
            return None;
        }
        let f = g.iter().zip(&self.target).map(|(g, r)| g * r).sum::<f64>() / gg;
        if !(f > 0.0) {
            return None;
        }
        Some((f, self.cost(f, mu)))
    }
}

/// Least-squares division model for a polynomial lens: coarse grid over
/// `μ = λ·f²` with `f` profiled out in closed form, then Gauss-Newton on
/// `(f, μ)` with step halving. When the normal equations are ill-conditioned
/// the refinement switches to a golden-section search on the profiled cost.
pub fn fit_division_model(poly: &PolynomialFisheyeModel, thetas: &[f64]) -> Result<DivisionFit> {
    if thetas.len() < 8 {
        return Err(Error::DegenerateInput(format!("need at least 8 field angles, got {}", thetas.len())));
    }
    let max = poly.max_field_angle();
    if thetas.iter().any(|&t| !(0.0..=max + 1e-12).contains(&t)) {
        return Err(Error::DegenerateInput("field angles must lie in [0, max_field_angle]".into()));
    }
    let target: Vec<f64> = thetas.iter().map(|&t| poly.radius_unchecked(t)).collect();
    let problem = Problem { thetas, target };

    // Coarse grid over μ.
    let mut best: Option<(f64, f64, f64)> = None;
    for k in 0..=600 {
        let mu = -2.0 + k as f64 * 0.005;
        if let Some((f, c)) = problem.profile(mu) {
            if best.map_or(true, |b| c < b.2) {
                best = Some((f, mu, c));
            }
        }
    }
    let (mut f, mut mu, initial_cost) =
        best.ok_or_else(|| Error::FitDiverged("no representable grid point".into()))?;
    let mut cost = initial_cost;

    let mut ill_conditioned = false;
    for _ in 0..100 {
        let (mut jtj, mut jtr) = ([[0.0f64; 2]; 2], [0.0f64; 2]);
        let mut ok = true;
        for (&t, &r) in thetas.iter().zip(&problem.target) {
            let (Some(g), Some(dg)) = (unit_radius(t, mu), unit_radius_dmu(t, mu)) else {
                if t == 0.0 {
                    continue;
                }
                ok = false;
                break;
            };
            let res = f * g - r;
            let j = [g, f * dg];
            for a in 0..2 {
                jtr[a] += j[a] * res;
                for b in 0..2 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        let scale = jtj[0][0] * jtj[1][1];
        if !ok || !(det > 1e-12 * scale) {
            ill_conditioned = true;
            break;
        }
        let df = -(jtj[1][1] * jtr[0] - jtj[0][1] * jtr[1]) / det;
        let dmu = -(jtj[0][0] * jtr[1] - jtj[1][0] * jtr[0]) / det;
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let (nf, nmu) = (f + step * df, mu + step * dmu);
            let nc = if nf > 0.0 { problem.cost(nf, nmu) } else { f64::INFINITY };
            if nc < cost {
                let rel = (cost - nc) / cost.max(f64::MIN_POSITIVE);
                f = nf;
                mu = nmu;
                cost = nc;
                improved = rel > 1e-15;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }

    if ill_conditioned {
        let (f2, mu2, c2) = golden_refine(&problem, mu - 0.005, mu + 0.005);
        if c2 < cost {
            f = f2;
            mu = mu2;
            cost = c2;
        }
    }

    if !cost.is_finite() || cost > initial_cost {
        return Err(Error::FitDiverged(format!("cost {cost} did not improve on {initial_cost}")));
    }
    let model = DivisionModel::new(f, mu / (f * f), poly.principal_point(), max)?;
    let residuals = thetas
        .iter()
        .zip(&problem.target)
        .map(|(&t, &r)| invert_division_radius(&model, t).map(|d| d - r))
        .collect::<Result<Vec<_>>>()?;
    Ok(DivisionFit { model, thetas: thetas.to_vec(), residuals })
}

fn golden_refine(problem: &Problem<'_>, mut lo: f64, mut hi: f64) -> (f64, f64, f64) {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let eval = |mu: f64| problem.profile(mu).map_or(f64::INFINITY, |(_, c)| c);
    for _ in 0..200 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if eval(a) < eval(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mu = 0.5 * (lo + hi);
    match problem.profile(mu) {
        Some((f, c)) => (f, mu, c),
        None => (1.0, mu, f64::INFINITY),
    }
}
