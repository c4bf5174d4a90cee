use super::Point2;
use crate::error::{Error, Result};

/// Result of [`fit_circle_kasa`]. Nearly collinear input falls back to a
/// total-least-squares line with perpendicular residuals.
#[derive(Debug, Clone, PartialEq)]
pub enum CircleFit {
    Circle { center: Point2, radius: f64, residuals: Vec<f64> },
    Line { point: Point2, direction: Point2, residuals: Vec<f64> },
}

impl CircleFit {
    pub fn residuals(&self) -> &[f64] {
        match self {
            CircleFit::Circle { residuals, .. } | CircleFit::Line { residuals, .. } => residuals,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().iter().copied().fold(0.0, f64::max)
    }

    pub fn is_line_fallback(&self) -> bool {
        matches!(self, CircleFit::Line { .. })
    }
}

// Radius beyond which (in normalized units, where the point cloud has unit
// RMS spread) the circle is indistinguishable from a line.
const MAX_NORMALIZED_RADIUS: f64 = 1e6;

/// Algebraic (Kåsa) least-squares circle: minimizes the sum of
/// `(x² + y² + D·x + E·y + F)²`. Solved in centroid-shifted, spread-normalized
/// coordinates.
pub fn fit_circle_kasa(points: &[Point2]) -> Result<CircleFit> {
    let n = points.len();
    if n < 3 {
        return Err(Error::DegenerateInput(format!("circle fit needs 3 points, got {n}")));
    }
    let mean = points.iter().fold(Point2::default(), |a, &p| a + p) * (1.0 / n as f64);
    let spread = (points.iter().map(|&p| (p - mean).dot(p - mean)).sum::<f64>() / n as f64).sqrt();
    if spread == 0.0 || !spread.is_finite() {
        return Err(Error::DegenerateInput("points coincide".into()));
    }
    let q: Vec<Point2> = points.iter().map(|&p| (p - mean) * (1.0 / spread)).collect();

    // Covariance eigen-structure decides the line fallback.
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in &q {
        sxx += p.x * p.x;
        sxy += p.x * p.y;
        syy += p.y * p.y;
    }
    let mid = 0.5 * (sxx + syy);
    let rad = (0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy).sqrt();
    let minor = mid - rad;
    let major_angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let direction = Point2::new(major_angle.cos(), major_angle.sin());

    let line_fit = || {
        let normal = Point2::new(-direction.y, direction.x);
        let residuals = points.iter().map(|&p| (p - mean).dot(normal).abs()).collect();
        CircleFit::Line { point: mean, direction, residuals }
    };
    if minor <= 1e-14 * mid {
        return Ok(line_fit());
    }

    // Normal equations for [D, E, F].
    let (mut sx, mut sy) = (0.0, 0.0);
    let (mut sxz, mut syz, mut sz) = (0.0, 0.0, 0.0);
    for p in &q {
        let z = p.x * p.x + p.y * p.y;
        sx += p.x;
        sy += p.y;
        sxz += p.x * z;
        syz += p.y * z;
        sz += z;
    }
    let m = [[sxx, sxy, sx], [sxy, syy, sy], [sx, sy, n as f64]];
    let rhs = [-sxz, -syz, -sz];
    let Some(sol) = solve3(m, rhs) else {
        return Ok(line_fit());
    };
    let (d, e, f) = (sol[0], sol[1], sol[2]);
    let cx = -d / 2.0;
    let cy = -e / 2.0;
    let r2 = cx * cx + cy * cy - f;
    if !(r2 > 0.0) || r2.sqrt() > MAX_NORMALIZED_RADIUS || !r2.is_finite() {
        return Ok(line_fit());
    }
    let center = Point2::new(cx, cy) * spread + mean;
    let radius = r2.sqrt() * spread;
    let residuals = points.iter().map(|&p| (p.dist(center) - radius).abs()).collect();
    Ok(CircleFit::Circle { center, radius, residuals })
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |a: &[[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(&m);
    let scale: f64 = m.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    if d.abs() <= 1e-13 * scale.powi(3) {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut mk = m;
        for r in 0..3 {
            mk[r][k] = b[r];
        }
        *o = det(&mk) / d;
    }
    Some(out)
}
