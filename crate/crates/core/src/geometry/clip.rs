use super::{polygon_area, signed_area, Contour, Point2};
use crate::error::{Error, Result};

/// True when every turn has the same sign (collinear runs allowed).
pub fn is_convex(points: &[Point2]) -> bool {
    let n = points.len();
    if n < 3 {
        return false;
    }
    let mut sign = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let c = points[(i + 2) % n];
        let t = (b - a).cross(c - b);
        if t.abs() <= 1e-12 * (b - a).norm() * (c - b).norm() {
            continue;
        }
        if sign == 0.0 {
            sign = t.signum();
        } else if t.signum() != sign {
            return false;
        }
    }
    sign != 0.0
}

/// Sutherland-Hodgman clip of `subject` by the convex counter-clockwise
/// `clip` polygon.
fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut out = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % n];
        let inside = |p: Point2| (b - a).cross(p - a) >= 0.0;
        let input = std::mem::take(&mut out);
        let m = input.len();
        for k in 0..m {
            let cur = input[k];
            let prev = input[(k + m - 1) % m];
            let (ci, pi) = (inside(cur), inside(prev));
            if ci != pi {
                let d1 = (b - a).cross(prev - a);
                let d2 = (b - a).cross(cur - a);
                let t = d1 / (d1 - d2);
                out.push(prev.lerp(cur, t));
            }
            if ci {
                out.push(cur);
            }
        }
    }
    out
}

/// Exact IoU of two convex polygons via clipping and shoelace areas.
pub fn convex_clip_iou(a: &Contour, b: &Contour) -> Result<f64> {
    let (pa, pb) = (a.vertices(), b.vertices());
    if !is_convex(pa) || !is_convex(pb) {
        return Err(Error::NonConvexInput);
    }
    debug_assert!(signed_area(pb) > 0.0);
    let inter = polygon_area(&clip_convex(pa, pb));
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return Err(Error::BothEmpty);
    }
    Ok((inter / union).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x: f64, y: f64, s: f64) -> Contour {
        Contour::new(vec![
            Point2::new(x, y),
            Point2::new(x + s, y),
            Point2::new(x + s, y + s),
            Point2::new(x, y + s),
        ])
        .unwrap()
    }

    #[test]
    fn identical_and_offset() {
        let a = square(0.0, 0.0, 1.0);
        assert!((convex_clip_iou(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        let b = square(0.5, 0.0, 1.0);
        assert!((convex_clip_iou(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let c = square(3.0, 0.0, 1.0);
        assert_eq!(convex_clip_iou(&a, &c).unwrap(), 0.0);
    }

    #[test]
    fn non_convex_rejected() {
        let l = Contour::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 2.0),
            Point2::new(0.0, 2.0),
        ])
        .unwrap();
        assert_eq!(convex_clip_iou(&l, &square(0.0, 0.0, 1.0)), Err(Error::NonConvexInput));
    }
}
