use super::{Contour, Point2};
use crate::error::{Error, Result};

/// `n` points on the contour boundary at arc-length spacing `perimeter / n`,
/// starting at vertex 0.
pub fn resample_arclength(contour: &Contour, n: usize) -> Result<Contour> {
    if n < 3 {
        return Err(Error::DegenerateInput(format!("resampling needs N >= 3, got {n}")));
    }
    let v = contour.vertices();
    let m = v.len();
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for i in 0..m {
        let (a, b) = contour.edge(i);
        cum.push(cum[i] + a.dist(b));
    }
    let total = cum[m];
    if !(total > 0.0) {
        return Err(Error::DegenerateInput("contour has zero perimeter".into()));
    }
    let step = total / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut edge = 0;
    for k in 0..n {
        let s = k as f64 * step;
        while edge + 1 < m && cum[edge + 1] <= s {
            edge += 1;
        }
        let (a, b) = contour.edge(edge);
        let len = cum[edge + 1] - cum[edge];
        let t = if len > 0.0 { ((s - cum[edge]) / len).clamp(0.0, 1.0) } else { 0.0 };
        out.push(if t == 0.0 { a } else { a.lerp(b, t) });
    }
    Ok(Contour::from_vertices_unchecked(out))
}

/// Curvature (1/px) of the circle through vertex `index` and its neighbors
/// `support` steps away on either side. Collinear or coincident
/// neighborhoods give 0.
pub fn local_curvature(contour: &Contour, index: usize, support: usize) -> f64 {
    let v = contour.vertices();
    let n = v.len();
    if n < 3 || support == 0 {
        return 0.0;
    }
    let k = support % n;
    let p = v[index % n];
    let a = v[(index + n - k) % n];
    let b = v[(index + k) % n];
    circumcurvature(a, p, b)
}

pub(crate) fn circumcurvature(a: Point2, p: Point2, b: Point2) -> f64 {
    let la = p.dist(a);
    let lb = p.dist(b);
    let lc = a.dist(b);
    let denom = la * lb * lc;
    if denom == 0.0 {
        return 0.0;
    }
    2.0 * (p - a).cross(b - a).abs() / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn circle(r: f64, n: usize) -> Contour {
        Contour::new((0..n).map(|i| Point2::from_polar(r, i as f64 * TAU / n as f64)).collect()).unwrap()
    }

    #[test]
    fn square_corners() {
        let sq = Contour::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let r = resample_arclength(&sq, 4).unwrap();
        assert_eq!(r.vertices(), sq.vertices());
    }

    #[test]
    fn equilateral_identity() {
        let c = circle(10.0, 9);
        let r = resample_arclength(&c, 9).unwrap();
        for (p, q) in r.vertices().iter().zip(c.vertices()) {
            assert!(p.dist(*q) < 1e-12);
        }
    }

    #[test]
    fn circle_spacing_uniform() {
        let c = circle(50.0, 2000);
        let r = resample_arclength(&c, 24).unwrap();
        let v = r.vertices();
        let chords: Vec<f64> = (0..24).map(|i| v[i].dist(v[(i + 1) % 24])).collect();
        let mean = chords.iter().sum::<f64>() / 24.0;
        for ch in chords {
            assert!((ch - mean).abs() < 1e-6 * mean.max(1.0) * 10.0, "{ch} vs {mean}");
        }
    }

    #[test]
    fn perimeter_preserved_for_dense_n() {
        let c = circle(30.0, 500);
        for n in [24, 60, 120] {
            let r = resample_arclength(&c, n).unwrap();
            assert!((r.perimeter() - c.perimeter()).abs() / c.perimeter() < 0.01);
        }
    }

    #[test]
    fn curvature_cases() {
        let line = Contour::from_vertices_unchecked((0..10).map(|i| Point2::new(i as f64, 0.0)).chain([Point2::new(5.0, 5.0)]).collect());
        assert_eq!(local_curvature(&line, 4, 2), 0.0);
        let c = circle(20.0, 720);
        assert!((local_curvature(&c, 100, 3) - 0.05).abs() < 0.05 * 0.05);
        let sq = Contour::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(10.0, 0.0),
            Point2::new(10.0, 10.0),
            Point2::new(0.0, 10.0),
        ])
        .unwrap()
        .densified(1.0);
        // vertex 0 is a corner, vertex 5 the middle of the bottom edge
        assert!(local_curvature(&sq, 0, 3) > local_curvature(&sq, 5, 3));
    }

    #[test]
    fn rejects_small_n() {
        assert!(resample_arclength(&circle(1.0, 8), 2).is_err());
    }
}
