use crate::camera::{project_line_curve, Line3D, RadialModel, Vec3};
use crate::error::Result;
use crate::geometry::Point2;

/// A straight 3D segment and its image curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeCurve {
    pub line: Line3D,
    pub t_range: (f64, f64),
    pub points: Vec<Point2>,
}

/// Samples per projected line.
pub const CUBE_CURVE_SAMPLES: usize = 64;

fn segment(a: Vec3, b: Vec3) -> Result<(Line3D, (f64, f64))> {
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    Ok((Line3D::new(d, a)?, (0.0, len)))
}

/// The open cube around the camera, in camera coordinates: the front face
/// `z = 1` and the four side faces spanning `z ∈ [0, 1]`, with
/// `grid_density` evenly spaced interior lines per face and direction.
/// The `z = 0` rim lies on the 90° field-angle cone.
pub fn open_cube_segments(grid_density: usize) -> Vec<(Vec3, Vec3)> {
    let mut segs = Vec::new();
    let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
    for i in 0..4 {
        let (x0, y0) = corners[i];
        let (x1, y1) = corners[(i + 1) % 4];
        segs.push(([x0, y0, 1.0], [x1, y1, 1.0]));
        segs.push(([x0, y0, 0.0], [x1, y1, 0.0]));
        segs.push(([x0, y0, 0.0], [x0, y0, 1.0]));
    }
    let n = grid_density;
    for k in 1..=n {
        let s = -1.0 + 2.0 * k as f64 / (n + 1) as f64;
        let z = k as f64 / (n + 1) as f64;
        // front face
        segs.push(([s, -1.0, 1.0], [s, 1.0, 1.0]));
        segs.push(([-1.0, s, 1.0], [1.0, s, 1.0]));
        for i in 0..4 {
            let (x0, y0) = corners[i];
            let (x1, y1) = corners[(i + 1) % 4];
            let t = 0.5 * (s + 1.0);
            let (xs, ys) = (x0 + (x1 - x0) * t, y0 + (y1 - y0) * t);
            // side face: a depth line and a constant-depth line
            segs.push(([xs, ys, 0.0], [xs, ys, 1.0]));
            segs.push(([x0, y0, z], [x1, y1, z]));
        }
    }
    segs
}

/// Projects the open cube's edges and grid lines through `model`.
pub fn render_open_cube<M: RadialModel + ?Sized>(model: &M, grid_density: usize) -> Result<Vec<CubeCurve>> {
    open_cube_segments(grid_density)
        .into_iter()
        .map(|(a, b)| {
            let (line, t_range) = segment(a, b)?;
            let points = project_line_curve(model, &line, t_range, CUBE_CURVE_SAMPLES)?;
            Ok(CubeCurve { line, t_range, points })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{fit_division_model, line_circle_residual, uniform_theta_grid, CameraId, CameraRig, DEFAULT_FIT_SAMPLES};
    use crate::geometry::fit_circle_kasa;

    #[test]
    fn counts() {
        assert_eq!(open_cube_segments(0).len(), 12);
        assert_eq!(open_cube_segments(3).len(), 12 + 3 * 10);
    }

    #[test]
    fn division_model_lines_are_circles() {
        let rig = CameraRig::shipped();
        let poly = &rig.get(CameraId::Front).unwrap().model;
        let fit = fit_division_model(poly, &uniform_theta_grid(poly.max_field_angle(), DEFAULT_FIT_SAMPLES)).unwrap();
        for c in render_open_cube(&fit.model, 5).unwrap() {
            let res = line_circle_residual(&fit.model, &c.line, c.t_range, CUBE_CURVE_SAMPLES).unwrap();
            assert!(res < 1.0, "{res}");
        }
    }

    #[test]
    fn axis_plane_lines_are_straight() {
        let rig = CameraRig::shipped();
        let poly = &rig.get(CameraId::Front).unwrap().model;
        let curves = render_open_cube(poly, 1).unwrap();
        // Density 1 puts the x = 0 and y = 0 lines on the front face.
        for c in &curves[12..14] {
            let f = fit_circle_kasa(&c.points).unwrap();
            assert!(f.max_residual() < 1e-6, "{f:?}");
        }
    }
}
