use super::{convex_hull, Contour, Point2};
use crate::error::Result;

/// A rectangle rotated by `angle_deg` about its center. `width` runs along
/// the direction `angle_deg`, `height` along the perpendicular.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedRect {
    pub center: Point2,
    pub width: f64,
    pub height: f64,
    pub angle_deg: f64,
}

impl RotatedRect {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

/// Reduces an (angle, width, height) triple to the canonical representative
/// with angle in (-45, 45]: smallest absolute angle, positive on ties.
pub(crate) fn canonical_rect_angle(angle_deg: f64, width: f64, height: f64) -> (f64, f64, f64) {
    let mut a = (angle_deg + 90.0).rem_euclid(180.0) - 90.0;
    let (mut w, mut h) = (width, height);
    if a > 45.0 {
        a -= 90.0;
        std::mem::swap(&mut w, &mut h);
    } else if a <= -45.0 {
        a += 90.0;
        std::mem::swap(&mut w, &mut h);
    }
    (a, w, h)
}

/// Minimum-area enclosing rectangle. One side of the optimum is flush with a
/// hull edge, so every hull edge direction is tried; near-ties (relative
/// 1e-9) resolve to the smallest absolute angle, then the positive one.
pub fn min_area_rect(contour: &Contour) -> Result<RotatedRect> {
    let hull = convex_hull(contour.vertices())?;
    let h = hull.vertices();
    let n = h.len();
    let mut best: Option<RotatedRect> = None;
    for i in 0..n {
        let a = h[i];
        let b = h[(i + 1) % n];
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let u = d * (1.0 / len);
        let v = Point2::new(-u.y, u.x);
        let (mut u0, mut u1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &p in h {
            let pu = p.dot(u);
            let pv = p.dot(v);
            u0 = u0.min(pu);
            u1 = u1.max(pu);
            v0 = v0.min(pv);
            v1 = v1.max(pv);
        }
        let center = u * (0.5 * (u0 + u1)) + v * (0.5 * (v0 + v1));
        let (angle, width, height) = canonical_rect_angle(u.angle().to_degrees(), u1 - u0, v1 - v0);
        let cand = RotatedRect { center, width, height, angle_deg: angle };
        best = Some(match best {
            None => cand,
            Some(cur) => {
                let tol = 1e-9 * cur.area().max(cand.area());
                if cand.area() < cur.area() - tol {
                    cand
                } else if (cand.area() - cur.area()).abs() <= tol && prefer_angle(cand.angle_deg, cur.angle_deg) {
                    cand
                } else {
                    cur
                }
            }
        });
    }
    Ok(best.expect("hull has at least three edges"))
}

fn prefer_angle(a: f64, b: f64) -> bool {
    let (aa, ab) = (a.abs(), b.abs());
    if (aa - ab).abs() > 1e-9 {
        aa < ab
    } else {
        a > b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{bounds, polygon_area};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rotated_square(angle_deg: f64, side: f64) -> Contour {
        let t = angle_deg.to_radians();
        let (c, s) = (t.cos(), t.sin());
        let h = side / 2.0;
        let v = [(-h, -h), (h, -h), (h, h), (-h, h)]
            .iter()
            .map(|&(x, y)| Point2::new(c * x - s * y + 5.0, s * x + c * y + 3.0))
            .collect();
        Contour::new(v).unwrap()
    }

    #[test]
    fn rotated_unit_square() {
        let r = min_area_rect(&rotated_square(30.0, 1.0)).unwrap();
        assert!((r.angle_deg - 30.0).abs() < 1e-9);
        assert!((r.area() - 1.0).abs() < 1e-12);
        assert!((r.center.x - 5.0).abs() < 1e-12 && (r.center.y - 3.0).abs() < 1e-12);
    }

    #[test]
    fn axis_aligned_square_has_zero_angle() {
        let r = min_area_rect(&rotated_square(0.0, 2.0)).unwrap();
        assert_eq!(r.angle_deg, 0.0);
    }

    #[test]
    fn square_at_45_prefers_positive() {
        let r = min_area_rect(&rotated_square(45.0, 2.0)).unwrap();
        assert!((r.angle_deg - 45.0).abs() < 1e-9, "{}", r.angle_deg);
    }

    #[test]
    fn triangle_rect_is_twice_area() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let v: Vec<Point2> = (0..3)
                .map(|_| Point2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)))
                .collect();
            let Ok(c) = Contour::new(v) else { continue };
            let r = min_area_rect(&c).unwrap();
            assert!((r.area() - 2.0 * c.area()).abs() < 1e-9 * r.area().max(1.0));
        }
    }

    /// Brute-force sweep over angles at 0.1 degree steps.
    fn brute_min_area(pts: &[Point2]) -> f64 {
        let mut best = f64::INFINITY;
        for k in 0..900 {
            let t = (k as f64 * 0.1).to_radians();
            let u = Point2::new(t.cos(), t.sin());
            let v = Point2::new(-u.y, u.x);
            let (mut a0, mut a1, mut b0, mut b1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
            for &p in pts {
                a0 = a0.min(p.dot(u));
                a1 = a1.max(p.dot(u));
                b0 = b0.min(p.dot(v));
                b1 = b1.max(p.dot(v));
            }
            best = best.min((a1 - a0) * (b1 - b0));
        }
        best
    }

    #[test]
    fn random_convex_polygons_beat_bbox_and_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let pts: Vec<Point2> = (0..12)
                .map(|_| Point2::new(rng.gen_range(0.0..50.0), rng.gen_range(0.0..20.0)))
                .collect();
            let hull = convex_hull(&pts).unwrap();
            let r = min_area_rect(&hull).unwrap();
            let (lo, hi) = bounds(hull.vertices());
            assert!(r.area() <= (hi.x - lo.x) * (hi.y - lo.y) + 1e-9);
            assert!(r.area() <= brute_min_area(hull.vertices()) + 1e-9);
            assert!(r.area() >= polygon_area(hull.vertices()) - 1e-9);
        }
    }

    #[test]
    fn canonical_angle_range() {
        for a in [-90.0, -60.0, -45.0, 0.0, 44.9, 45.0, 89.0, 135.0, 270.0] {
            let (c, _, _) = canonical_rect_angle(a, 2.0, 1.0);
            assert!(c > -45.0 && c <= 45.0, "{a} -> {c}");
        }
    }
}
