use std::collections::{HashMap, VecDeque};

use log::debug;
use rayon::prelude::*;

use super::scene::{Cuboid, Scene};
use crate::camera::{CameraId, RadialModel, RigCamera, Vec3};
use crate::error::{Error, Result};
use crate::geometry::{BinaryMask, Contour, Point2};

/// Instances with fewer visible pixels are dropped.
pub const MIN_INSTANCE_PIXELS: usize = 30;

/// Vehicle-frame viewing rays through every pixel center of one camera.
#[derive(Debug, Clone)]
pub struct RayTable {
    pub camera: CameraId,
    pub width: usize,
    pub height: usize,
    pub origin: Vec3,
    rays: Vec<Option<Vec3>>,
}

impl RayTable {
    pub fn new(camera: &RigCamera) -> Self {
        let [w, h] = camera.model.image_size();
        let (width, height) = (w as usize, h as usize);
        let rays = (0..width * height)
            .into_par_iter()
            .map(|k| {
                let p = Point2::new((k % width) as f64 + 0.5, (k / width) as f64 + 0.5);
                camera.model.unproject(p).map(|d| camera.pose.camera_to_vehicle_dir(d))
            })
            .collect();
        Self { camera: camera.id, width, height, origin: camera.pose.translation, rays }
    }
}

/// Entry distance of a ray into a cuboid, if it hits from outside.
fn ray_cuboid(origin: Vec3, dir: Vec3, c: &Cuboid) -> Option<f64> {
    let (s, co) = c.yaw.sin_cos();
    let o = [origin[0] - c.center.x, origin[1] - c.center.y, origin[2] - 0.5 * c.height];
    let lo = [co * o[0] + s * o[1], -s * o[0] + co * o[1], o[2]];
    let ld = [co * dir[0] + s * dir[1], -s * dir[0] + co * dir[1], dir[2]];
    let half = [0.5 * c.length, 0.5 * c.width, 0.5 * c.height];
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..3 {
        if ld[k] == 0.0 {
            if lo[k].abs() > half[k] {
                return None;
            }
            continue;
        }
        let a = (-half[k] - lo[k]) / ld[k];
        let b = (half[k] - lo[k]) / ld[k];
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    (t0 <= t1 && t0 > 0.0).then_some(t0)
}

/// Index of the nearest cuboid along each pixel ray (`u32::MAX` for none).
pub fn label_image(scene: &Scene, rays: &RayTable) -> Vec<u32> {
    rays.rays
        .par_iter()
        .map(|ray| {
            let Some(d) = ray else { return u32::MAX };
            let mut best = (f64::INFINITY, u32::MAX);
            for (i, c) in scene.cuboids.iter().enumerate() {
                if let Some(t) = ray_cuboid(rays.origin, *d, c) {
                    if t < best.0 {
                        best = (t, i as u32);
                    }
                }
            }
            best.1
        })
        .collect()
}

/// One visible object in one camera image.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedInstance {
    /// Index into the scene's cuboids.
    pub object: usize,
    pub class: usize,
    pub contour: Contour,
    pub mask: BinaryMask,
}

/// Renders every visible cuboid with a per-pixel depth test. Each
/// instance mask is the largest 4-connected visible part with holes filled;
/// the contour follows its pixel edges and rasterizes back to it exactly.
pub fn render_instances(scene: &Scene, rays: &RayTable) -> Result<Vec<RenderedInstance>> {
    let labels = label_image(scene, rays);
    let (w, h) = (rays.width, rays.height);
    let out: Vec<Option<RenderedInstance>> = (0..scene.cuboids.len())
        .into_par_iter()
        .map(|i| -> Result<Option<RenderedInstance>> {
            let bits: Vec<bool> = labels.iter().map(|&l| l == i as u32).collect();
            let visible = bits.iter().filter(|&&b| b).count();
            if visible < MIN_INSTANCE_PIXELS {
                debug!("{}: object {i} has {visible} visible pixels, skipped", rays.camera);
                return Ok(None);
            }
            let mut bits = largest_component(&bits, w, h);
            regularize(&mut bits, w, h);
            let mask = BinaryMask::from_bits(w, h, bits)?;
            if mask.count() < MIN_INSTANCE_PIXELS {
                return Ok(None);
            }
            let contour = trace_boundary(&mask)?;
            Ok(Some(RenderedInstance { object: i, class: scene.cuboids[i].class, contour, mask }))
        })
        .collect::<Result<_>>()?;
    Ok(out.into_iter().flatten().collect())
}

fn neighbors4(k: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (k % w, k / w);
    [
        (x > 0).then(|| k - 1),
        (x + 1 < w).then(|| k + 1),
        (y > 0).then(|| k - w),
        (y + 1 < h).then(|| k + w),
    ]
    .into_iter()
    .flatten()
}

/// Largest 4-connected component; the first in raster order wins ties.
pub fn largest_component(bits: &[bool], w: usize, h: usize) -> Vec<bool> {
    let mut label = vec![usize::MAX; bits.len()];
    let mut best: (usize, usize) = (0, usize::MAX);
    let mut queue = VecDeque::new();
    for start in 0..bits.len() {
        if !bits[start] || label[start] != usize::MAX {
            continue;
        }
        label[start] = start;
        queue.push_back(start);
        let mut size = 0;
        while let Some(k) = queue.pop_front() {
            size += 1;
            for n in neighbors4(k, w, h) {
                if bits[n] && label[n] == usize::MAX {
                    label[n] = start;
                    queue.push_back(n);
                }
            }
        }
        if size > best.0 {
            best = (size, start);
        }
    }
    label.iter().map(|&l| l == best.1).collect()
}

/// Fills holes and removes diagonal pinches until neither remains, so the
/// foreground boundary is a single simple loop.
fn regularize(bits: &mut [bool], w: usize, h: usize) {
    loop {
        let mut changed = fill_holes(bits, w, h);
        for y in 0..h.saturating_sub(1) {
            for x in 0..w.saturating_sub(1) {
                let k = y * w + x;
                let (a, b, c, d) = (bits[k], bits[k + 1], bits[k + w], bits[k + w + 1]);
                if a == d && b == c && a != b {
                    let fill = if a { [k + 1, k + w] } else { [k, k + w + 1] };
                    for f in fill {
                        bits[f] = true;
                    }
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Marks background not 4-connected to the image border as foreground.
fn fill_holes(bits: &mut [bool], w: usize, h: usize) -> bool {
    let mut outside = vec![false; bits.len()];
    let mut queue = VecDeque::new();
    for k in 0..bits.len() {
        let (x, y) = (k % w, k / w);
        if (x == 0 || y == 0 || x + 1 == w || y + 1 == h) && !bits[k] {
            outside[k] = true;
            queue.push_back(k);
        }
    }
    while let Some(k) = queue.pop_front() {
        for n in neighbors4(k, w, h) {
            if !bits[n] && !outside[n] {
                outside[n] = true;
                queue.push_back(n);
            }
        }
    }
    let mut changed = false;
    for (b, o) in bits.iter_mut().zip(&outside) {
        if !*b && !*o {
            *b = true;
            changed = true;
        }
    }
    changed
}

/// Outer boundary of a mask along pixel edges, collinear runs merged.
/// The mask must be one 4-connected region without holes or diagonal
/// pinches.
pub fn trace_boundary(mask: &BinaryMask) -> Result<Contour> {
    let (w, h) = mask.dims();
    let fg = |x: i64, y: i64| x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && mask.get(x as usize, y as usize);
    let mut next: HashMap<(i64, i64), (i64, i64)> = HashMap::new();
    let mut start: Option<(i64, i64)> = None;
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            if !fg(x, y) {
                continue;
            }
            let edges = [
                (!fg(x, y - 1), (x, y), (x + 1, y)),
                (!fg(x + 1, y), (x + 1, y), (x + 1, y + 1)),
                (!fg(x, y + 1), (x + 1, y + 1), (x, y + 1)),
                (!fg(x - 1, y), (x, y + 1), (x, y)),
            ];
            for (open, a, b) in edges {
                if open {
                    if next.insert(a, b).is_some() {
                        return Err(Error::DegenerateInput(format!("mask boundary branches at {a:?}")));
                    }
                    start.get_or_insert(a);
                }
            }
        }
    }
    let start = start.ok_or_else(|| Error::DegenerateInput("empty mask".into()))?;
    let mut corners = vec![start];
    let mut cur = start;
    loop {
        cur = next[&cur];
        if cur == start {
            break;
        }
        corners.push(cur);
    }
    if corners.len() != next.len() {
        return Err(Error::DegenerateInput("mask boundary has several loops".into()));
    }
    let n = corners.len();
    let dir = |a: (i64, i64), b: (i64, i64)| ((b.0 - a.0).signum(), (b.1 - a.1).signum());
    let vertices: Vec<Point2> = (0..n)
        .filter(|&i| dir(corners[(i + n - 1) % n], corners[i]) != dir(corners[i], corners[(i + 1) % n]))
        .map(|i| Point2::new(corners[i].0 as f64, corners[i].1 as f64))
        .collect();
    Contour::new(vertices)
}
