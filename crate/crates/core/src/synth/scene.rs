use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::shapes::oriented_corners;

/// Scene generation parameters. Lengths in meters, vehicle frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub seed: u64,
    pub n_objects: usize,
    pub length_range: (f64, f64),
    pub width_range: (f64, f64),
    pub height_range: (f64, f64),
    /// Placement region for footprint centers on the ground plane.
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Ego-vehicle footprint kept free of objects, `(min, max)` corners.
    pub keepout: ((f64, f64), (f64, f64)),
    /// Minimum clearance between footprints.
    pub min_gap: f64,
    /// Placement attempts per object before giving up.
    pub max_attempts: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_objects: 12,
            length_range: (3.6, 5.0),
            width_range: (1.6, 2.0),
            height_range: (1.3, 1.9),
            x_range: (-11.0, 14.0),
            y_range: (-11.0, 11.0),
            keepout: ((-1.8, -1.5), (4.6, 1.5)),
            min_gap: 0.4,
            max_attempts: 2000,
        }
    }
}

impl SceneConfig {
    fn validate(&self) -> Result<()> {
        let ok = |r: (f64, f64)| r.0 > 0.0 && r.0 <= r.1 && r.1.is_finite();
        if !(ok(self.length_range) && ok(self.width_range) && ok(self.height_range)) {
            return Err(Error::Config("object size ranges must be positive and ordered".into()));
        }
        if !(self.x_range.0 < self.x_range.1 && self.y_range.0 < self.y_range.1) {
            return Err(Error::Config("placement region is empty".into()));
        }
        if !(self.min_gap >= 0.0) || self.max_attempts == 0 {
            return Err(Error::Config("min_gap must be >= 0 and max_attempts > 0".into()));
        }
        Ok(())
    }
}

/// A box resting on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cuboid {
    /// Footprint center on the ground plane.
    pub center: Point2,
    /// Heading about +z, radians.
    pub yaw: f64,
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub class: usize,
}

impl Cuboid {
    /// Footprint corners, grown by `margin` on every side.
    pub fn footprint(&self, margin: f64) -> [Point2; 4] {
        oriented_corners(self.center, self.length + 2.0 * margin, self.width + 2.0 * margin, self.yaw)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub cuboids: Vec<Cuboid>,
}

/// Separating-axis test for two convex quadrilaterals.
pub fn footprints_overlap(a: &[Point2; 4], b: &[Point2; 4]) -> bool {
    for poly in [a, b] {
        for i in 0..4 {
            let e = poly[(i + 1) % 4] - poly[i];
            let axis = Point2::new(-e.y, e.x);
            let proj = |q: &[Point2; 4]| {
                q.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    let d = p.dot(axis);
                    (lo.min(d), hi.max(d))
                })
            };
            let (a0, a1) = proj(a);
            let (b0, b1) = proj(b);
            if a1 <= b0 || b1 <= a0 {
                return false;
            }
        }
    }
    true
}

/// Places `n_objects` cuboids by rejection sampling so that footprints keep
/// `min_gap` apart and stay clear of the ego vehicle.
pub fn generate_scene(cfg: &SceneConfig) -> Result<Scene> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ((kx0, ky0), (kx1, ky1)) = cfg.keepout;
    let ego = oriented_corners(Point2::new(0.5 * (kx0 + kx1), 0.5 * (ky0 + ky1)), kx1 - kx0, ky1 - ky0, 0.0);
    let half_gap = 0.5 * cfg.min_gap;
    let mut cuboids: Vec<Cuboid> = Vec::with_capacity(cfg.n_objects);
    let uniform = |rng: &mut ChaCha8Rng, r: (f64, f64)| if r.0 < r.1 { rng.gen_range(r.0..r.1) } else { r.0 };
    for index in 0..cfg.n_objects {
        let mut placed = false;
        for _ in 0..cfg.max_attempts {
            let c = Cuboid {
                center: Point2::new(uniform(&mut rng, cfg.x_range), uniform(&mut rng, cfg.y_range)),
                yaw: rng.gen_range(-PI..PI),
                length: uniform(&mut rng, cfg.length_range),
                width: uniform(&mut rng, cfg.width_range),
                height: uniform(&mut rng, cfg.height_range),
                class: 0,
            };
            let fp = c.footprint(half_gap);
            if footprints_overlap(&fp, &ego) || cuboids.iter().any(|o| footprints_overlap(&fp, &o.footprint(half_gap))) {
                continue;
            }
            cuboids.push(c);
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::PlacementFailed { index, attempts: cfg.max_attempts });
        }
    }
    Ok(Scene { cuboids })
}
