use super::{convex_hull, Contour, Point2};
use crate::error::{Error, Result};

pub const MVEE_TOLERANCE: f64 = 1e-6;
pub const MVEE_MAX_ITERATIONS: usize = 1000;

/// Minimum-area enclosing ellipse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnclosingEllipse {
    pub center: Point2,
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Direction of the major axis, degrees in [-90, 90).
    pub angle_deg: f64,
    pub iterations: usize,
}

impl EnclosingEllipse {
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.semi_major * self.semi_minor
    }

    /// Normalized radial coordinate: 1 on the boundary, < 1 inside.
    pub fn level(&self, p: Point2) -> f64 {
        let t = self.angle_deg.to_radians();
        let d = p - self.center;
        let u = d.x * t.cos() + d.y * t.sin();
        let v = -d.x * t.sin() + d.y * t.cos();
        (u / self.semi_major).powi(2) + (v / self.semi_minor).powi(2)
    }
}

type Mat3 = [[f64; 3]; 3];

fn inv3(m: &Mat3) -> Option<Mat3> {
    let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    if !det.is_finite() || det.abs() < 1e-300 {
        return None;
    }
    let d = 1.0 / det;
    Some([
        [
            c00 * d,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * d,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * d,
        ],
        [
            c01 * d,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * d,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * d,
        ],
        [
            c02 * d,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * d,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * d,
        ],
    ])
}

/// Khachiyan's algorithm on the hull vertices, then an exact rescale so that
/// every input vertex is enclosed.
pub fn min_enclosing_ellipse(contour: &Contour) -> Result<EnclosingEllipse> {
    let hull = convex_hull(contour.vertices())?;
    let raw = hull.vertices();
    // Work in coordinates centered on the vertex mean for conditioning.
    let n = raw.len();
    let mean = raw.iter().fold(Point2::default(), |a, &p| a + p) * (1.0 / n as f64);
    let pts: Vec<Point2> = raw.iter().map(|&p| p - mean).collect();

    let mut u = vec![1.0 / n as f64; n];
    let mut iterations = 0;
    while iterations < MVEE_MAX_ITERATIONS {
        iterations += 1;
        let mut x: Mat3 = [[0.0; 3]; 3];
        for (p, &w) in pts.iter().zip(&u) {
            let q = [p.x, p.y, 1.0];
            for r in 0..3 {
                for c in 0..3 {
                    x[r][c] += w * q[r] * q[c];
                }
            }
        }
        let xi = inv3(&x).ok_or_else(|| Error::DegenerateInput("ellipse scatter matrix is singular".into()))?;
        let (mut j, mut mj) = (0, f64::NEG_INFINITY);
        for (i, p) in pts.iter().enumerate() {
            let q = [p.x, p.y, 1.0];
            let mut m = 0.0;
            for r in 0..3 {
                for c in 0..3 {
                    m += q[r] * xi[r][c] * q[c];
                }
            }
            if m > mj {
                mj = m;
                j = i;
            }
        }
        let step = (mj - 3.0) / (3.0 * (mj - 1.0));
        let mut change = 0.0;
        for (i, w) in u.iter_mut().enumerate() {
            let nw = (1.0 - step) * *w + if i == j { step } else { 0.0 };
            change += (nw - *w) * (nw - *w);
            *w = nw;
        }
        if change.sqrt() < MVEE_TOLERANCE {
            break;
        }
    }

    let c = pts.iter().zip(&u).fold(Point2::default(), |a, (&p, &w)| a + p * w);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (p, &w) in pts.iter().zip(&u) {
        sxx += w * p.x * p.x;
        sxy += w * p.x * p.y;
        syy += w * p.y * p.y;
    }
    sxx -= c.x * c.x;
    sxy -= c.x * c.y;
    syy -= c.y * c.y;
    let det = sxx * syy - sxy * sxy;
    if det <= 0.0 || !det.is_finite() {
        return Err(Error::DegenerateInput("points are collinear".into()));
    }
    // A = inverse(S) / 2
    let (mut a, mut b, mut d) = (syy / (2.0 * det), -sxy / (2.0 * det), sxx / (2.0 * det));
    let level = |p: Point2| {
        let q = p - c;
        a * q.x * q.x + 2.0 * b * q.x * q.y + d * q.y * q.y
    };
    let worst = pts.iter().map(|&p| level(p)).fold(0.0, f64::max);
    if worst > 1.0 {
        a /= worst;
        b /= worst;
        d /= worst;
    }
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let (l_small, l_big) = (mid - rad, mid + rad);
    let semi_major = 1.0 / l_small.sqrt();
    let semi_minor = 1.0 / l_big.sqrt();
    let angle_deg = if rad <= 1e-12 * mid {
        0.0
    } else {
        let minor_dir = 0.5 * (2.0 * b).atan2(a - d);
        let major = (minor_dir + std::f64::consts::FRAC_PI_2).to_degrees();
        (major + 90.0).rem_euclid(180.0) - 90.0
    };
    Ok(EnclosingEllipse { center: c + mean, semi_major, semi_minor, angle_deg, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::min_area_rect;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, SQRT_2, TAU};

    #[test]
    fn circle_points_give_circle() {
        let v: Vec<Point2> = (0..40).map(|i| Point2::new(3.0, -2.0) + Point2::from_polar(7.0, i as f64 * TAU / 40.0)).collect();
        let e = min_enclosing_ellipse(&Contour::new(v).unwrap()).unwrap();
        assert!((e.semi_major - 7.0).abs() < 1e-3 && (e.semi_minor - 7.0).abs() < 1e-3);
        assert!(e.center.dist(Point2::new(3.0, -2.0)) < 1e-3);
    }

    #[test]
    fn square_gives_circumcircle() {
        let v = vec![Point2::new(-1.0, -1.0), Point2::new(1.0, -1.0), Point2::new(1.0, 1.0), Point2::new(-1.0, 1.0)];
        let e = min_enclosing_ellipse(&Contour::new(v).unwrap()).unwrap();
        assert!((e.semi_major - SQRT_2).abs() < 1e-3, "{e:?}");
        assert!((e.semi_minor - SQRT_2).abs() < 1e-3);
    }

    #[test]
    fn encloses_and_beats_rect_circumscribed_ellipse() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let pts: Vec<Point2> = (0..25)
                .map(|_| Point2::new(rng.gen_range(0.0..40.0), rng.gen_range(0.0..15.0)))
                .collect();
            let hull = crate::geometry::convex_hull(&pts).unwrap();
            let e = min_enclosing_ellipse(&hull).unwrap();
            for &p in &pts {
                assert!(e.level(p) <= 1.0 + 1e-4);
            }
            // The rectangle's circumscribed ellipse (axes scaled by sqrt 2)
            // encloses everything, so the minimum can only be smaller.
            let r = min_area_rect(&hull).unwrap();
            let oracle = PI * (r.width / SQRT_2) * (r.height / SQRT_2);
            assert!(e.area() <= oracle * (1.0 + 1e-6));
        }
    }

    #[test]
    fn elongated_axis_angle() {
        let t = 20f64.to_radians();
        let v: Vec<Point2> = (0..60)
            .map(|i| {
                let s = i as f64 * TAU / 60.0;
                let (x, y) = (10.0 * s.cos(), 3.0 * s.sin());
                Point2::new(x * t.cos() - y * t.sin(), x * t.sin() + y * t.cos())
            })
            .collect();
        let e = min_enclosing_ellipse(&Contour::new(v).unwrap()).unwrap();
        assert!((e.angle_deg - 20.0).abs() < 0.1, "{}", e.angle_deg);
        assert!((e.semi_major - 10.0).abs() < 0.05);
    }
}
