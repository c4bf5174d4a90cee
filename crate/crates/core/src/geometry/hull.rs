use super::{Contour, Point2};
use crate::error::{Error, Result};

/// Convex hull by Andrew's monotone chain. Collinear boundary points are
/// dropped; the result starts at the lowest-x (then lowest-y) point and runs
/// counter-clockwise.
pub fn convex_hull(points: &[Point2]) -> Result<Contour> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "convex hull needs 3 points, got {}",
            points.len()
        )));
    }
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();

    let cross = |o: Point2, a: Point2, b: Point2| (a - o).cross(b - o);
    let mut lower: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(Error::DegenerateInput("all points are collinear".into()));
    }
    Ok(Contour::from_vertices_unchecked(lower))
}
