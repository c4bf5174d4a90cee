//! Polygon vertex sampling: uniform angular, uniform perimeter and
//! curvature-adaptive.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{local_curvature, point_segment_distance, resample_arclength, Contour, Point2};
use crate::shapes::{PolarPolygon, PolarSector, SamplingKind, VertexPolygon};

/// Parameters of [`sample_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveSamplingConfig {
    pub target_vertices: usize,
    /// Region-of-support bounds for dominant point detection, in dense
    /// contour points.
    pub min_support: usize,
    pub max_support: usize,
    /// Stop the simplification epsilon search once the bracket is this
    /// narrow, px.
    pub epsilon_tolerance: f64,
}

impl AdaptiveSamplingConfig {
    pub fn new(target_vertices: usize) -> Self {
        Self { target_vertices, min_support: 3, max_support: 15, epsilon_tolerance: 1e-3 }
    }

    fn validate(&self) -> Result<()> {
        if self.target_vertices < 4 {
            return Err(Error::Config(format!("adaptive sampling needs N >= 4, got {}", self.target_vertices)));
        }
        if self.min_support == 0 || self.min_support > self.max_support {
            return Err(Error::Config(format!(
                "invalid support bounds [{}, {}]",
                self.min_support, self.max_support
            )));
        }
        if !(self.epsilon_tolerance > 0.0) {
            return Err(Error::Config("epsilon_tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Farthest boundary point along the ray from `origin` in direction `dir`.
fn farthest_hit(contour: &Contour, origin: Point2, dir: Point2) -> Option<f64> {
    let mut best: Option<f64> = None;
    for i in 0..contour.len() {
        let (a, b) = contour.edge(i);
        let e = b - a;
        let denom = dir.cross(e);
        if denom == 0.0 {
            // parallel edge: only its endpoints can lie on the ray
            for p in [a, b] {
                let q = p - origin;
                if q.cross(dir) == 0.0 && q.dot(dir) >= 0.0 {
                    best = Some(best.map_or(q.dot(dir), |t: f64| t.max(q.dot(dir))));
                }
            }
            continue;
        }
        let w = a - origin;
        let t = w.cross(e) / denom;
        let s = w.cross(dir) / denom;
        if t >= 0.0 && (0.0..=1.0).contains(&s) {
            best = Some(best.map_or(t, |cur| cur.max(t)));
        }
    }
    best
}

/// `N` rays from the centroid at angles `i·2π/N`, ray `i` through the
/// middle of sector `i`; each keeps the farthest boundary crossing.
pub fn sample_uniform_angular(contour: &Contour, n: usize) -> Result<PolarPolygon> {
    if n < 3 {
        return Err(Error::DegenerateInput(format!("angular sampling needs N >= 3, got {n}")));
    }
    let center = contour.centroid();
    if !contour.contains(center) {
        return Err(Error::CentroidOutside);
    }
    let sectors = (0..n)
        .map(|i| {
            let theta = i as f64 * TAU / n as f64;
            let r = farthest_hit(contour, center, Point2::from_polar(1.0, theta)).ok_or(Error::CentroidOutside)?;
            Ok(PolarSector { r, theta, alpha: 1 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolarPolygon { center, sectors })
}

fn relative_to_centroid(contour: &Contour, points: Vec<Point2>, kind: SamplingKind) -> VertexPolygon {
    let origin = contour.centroid();
    VertexPolygon { origin, vertices: points.into_iter().map(|p| p - origin).collect(), sampling_kind: kind }
}

/// `N` vertices at equal perimeter spacing starting at vertex 0.
pub fn sample_uniform_perimeter(contour: &Contour, n: usize) -> Result<VertexPolygon> {
    let pts = resample_arclength(contour, n)?.into_vertices();
    Ok(relative_to_centroid(contour, pts, SamplingKind::UniformPerimeter))
}

/// Teh-Chin region of support at dense point `i`: grow `k` while the chord
/// keeps lengthening and the relative deviation keeps rising.
fn region_of_support(v: &[Point2], i: usize, kmin: usize, kmax: usize) -> usize {
    let n = v.len();
    let chord = |k: usize| {
        let (a, b) = (v[(i + n - k % n) % n], v[(i + k) % n]);
        let l = a.dist(b);
        let d = point_segment_distance(v[i], a, b);
        (l, if l > 0.0 { d / l } else { f64::INFINITY })
    };
    let mut k = kmin;
    while k < kmax {
        let (l0, r0) = chord(k);
        let (l1, r1) = chord(k + 1);
        if l0 >= l1 || (r0 > 0.0 && r0 >= r1) {
            break;
        }
        k += 1;
    }
    k
}

/// `1 + cos` of the angle at `v[i]` between its `k`-th neighbors: 0 on a
/// straight run, 2 at a hairpin.
fn k_cosine(v: &[Point2], i: usize, k: usize) -> f64 {
    let n = v.len();
    let a = v[(i + n - k % n) % n] - v[i];
    let b = v[(i + k) % n] - v[i];
    let d = a.norm() * b.norm();
    if d == 0.0 {
        0.0
    } else {
        1.0 + a.dot(b) / d
    }
}

// A dominant point must beat this significance outright and stand out from
// its neighborhood by this factor; constant-curvature arcs have no corners.
const MIN_SIGNIFICANCE: f64 = 0.05;
const CONTRAST: f64 = 1.5;

/// Indices of dominant points on a closed dense polyline: k-cosine
/// significance at each point's region of support, non-maximum suppression
/// over half the support, then a straightness and contrast threshold.
pub fn dominant_points(v: &[Point2], min_support: usize, max_support: usize) -> Vec<usize> {
    let n = v.len();
    if n < 2 * min_support + 1 {
        return Vec::new();
    }
    let kmax = max_support.min((n - 1) / 2);
    let kmin = min_support.min(kmax);
    let support: Vec<usize> = (0..n).map(|i| region_of_support(v, i, kmin, kmax)).collect();
    let sig: Vec<f64> = (0..n).map(|i| k_cosine(v, i, support[i])).collect();
    let mut out = Vec::new();
    for i in 0..n {
        let k = support[i];
        let half = (k / 2).max(1);
        // strict against earlier points, non-strict against later ones, so
        // a plateau keeps its first point
        let is_max = (1..=half).all(|d| sig[i] > sig[(i + n - d) % n] && sig[i] >= sig[(i + d) % n]);
        if !is_max || sig[i] < MIN_SIGNIFICANCE {
            continue;
        }
        let w = (2 * k).min(n / 2);
        let mean = (1..=w).map(|d| sig[(i + n - d) % n] + sig[(i + d) % n]).sum::<f64>() / (2 * w) as f64;
        if sig[i] >= CONTRAST * mean {
            out.push(i);
        }
    }
    out
}

fn dp_chain(v: &[Point2], idx: &[usize], eps: f64, keep: &mut Vec<bool>, lo: usize, hi: usize) {
    if hi <= lo + 1 {
        return;
    }
    let (a, b) = (v[idx[lo]], v[idx[hi]]);
    let mut far = (0.0, lo);
    for m in lo + 1..hi {
        let d = point_segment_distance(v[idx[m]], a, b);
        if d > far.0 {
            far = (d, m);
        }
    }
    if far.0 > eps {
        keep[far.1] = true;
        dp_chain(v, idx, eps, keep, lo, far.1);
        dp_chain(v, idx, eps, keep, far.1, hi);
    }
}

/// Douglas-Peucker on the closed polygon `v[idx]`, anchored at its first
/// point and the point farthest from it. Returns the kept subset of `idx`.
fn douglas_peucker_closed(v: &[Point2], idx: &[usize], eps: f64) -> Vec<usize> {
    let m = idx.len();
    let anchor = (1..m)
        .max_by(|&a, &b| v[idx[0]].dist(v[idx[a]]).total_cmp(&v[idx[0]].dist(v[idx[b]])).then(b.cmp(&a)))
        .unwrap_or(0);
    let mut keep = vec![false; m];
    keep[0] = true;
    keep[anchor] = true;
    let mut ring: Vec<usize> = idx.to_vec();
    ring.push(idx[0]);
    let mut keep_ring = keep.clone();
    keep_ring.push(true);
    dp_chain(v, &ring, eps, &mut keep_ring, 0, anchor);
    dp_chain(v, &ring, eps, &mut keep_ring, anchor, m);
    (0..m).filter(|&i| keep_ring[i]).map(|i| idx[i]).collect()
}

/// Smallest epsilon (to `tol`) whose simplification keeps at most `n`
/// points.
fn reduce_to_at_most(v: &[Point2], idx: &[usize], n: usize, tol: f64) -> Vec<usize> {
    let diam = idx.iter().map(|&i| v[i].dist(v[idx[0]])).fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, diam.max(tol));
    let mut best = douglas_peucker_closed(v, idx, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let kept = douglas_peucker_closed(v, idx, mid);
        if kept.len() <= n {
            hi = mid;
            best = kept;
        } else {
            lo = mid;
        }
    }
    best
}

/// Dense points from index `a` to `b` (inclusive, wrapping).
fn span(v: &[Point2], a: usize, b: usize) -> impl Iterator<Item = usize> + '_ {
    let n = v.len();
    let len = (b + n - a) % n;
    let len = if len == 0 { n } else { len };
    (0..=len).map(move |k| (a + k) % n)
}

/// Splits the dense span `a..b` into `parts` pieces of equal weight, where
/// each dense edge weighs its length times `weight` at its start. Returns
/// the interior split points, which lie on the dense polyline.
fn weighted_splits(v: &[Point2], weight: &[f64], a: usize, b: usize, parts: usize) -> Vec<Point2> {
    let ids: Vec<usize> = span(v, a, b).collect();
    let mut cum = vec![0.0];
    for w in ids.windows(2) {
        let last = *cum.last().unwrap();
        cum.push(last + v[w[0]].dist(v[w[1]]) * weight[w[0]]);
    }
    let total = *cum.last().unwrap();
    let mut out = Vec::with_capacity(parts.saturating_sub(1));
    let mut e = 0;
    for k in 1..parts {
        let target = total * k as f64 / parts as f64;
        while e + 2 < cum.len() && cum[e + 1] < target {
            e += 1;
        }
        let seg = cum[e + 1] - cum[e];
        let t = if seg > 0.0 { ((target - cum[e]) / seg).clamp(0.0, 1.0) } else { 0.0 };
        out.push(v[ids[e]].lerp(v[ids[e + 1]], t));
    }
    out
}

/// Largest distance from the dense span `a..b` to the polyline through
/// `a`, `splits` and `b`.
fn span_error(v: &[Point2], a: usize, b: usize, splits: &[Point2]) -> f64 {
    let mut chain = Vec::with_capacity(splits.len() + 2);
    chain.push(v[a]);
    chain.extend_from_slice(splits);
    chain.push(v[b]);
    span(v, a, b)
        .map(|i| {
            chain
                .windows(2)
                .map(|w| point_segment_distance(v[i], w[0], w[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

// Curvature support (dense points) for placement weights; wide enough to
// smooth pixel staircases.
const WEIGHT_SUPPORT: usize = 5;
// Weight floor so long straight runs still receive vertices eventually.
const WEIGHT_FLOOR: f64 = 0.02;

/// Curvature-adaptive polygon with exactly `cfg.target_vertices` vertices.
///
/// Dominant points (corners) are found on the contour densified to 1 px.
/// When there are more than `N` of them they are simplified by
/// Douglas-Peucker with the smallest epsilon that keeps at most `N`. The
/// remaining vertices are handed out one at a time to the segment with the
/// largest chord error; inside a segment they split it at equal
/// curvature-weighted arc length (weight `√κ`, the density that equalizes
/// chord error), so arcs get more vertices than straight runs and a circle
/// comes out uniform.
pub fn sample_adaptive(contour: &Contour, cfg: &AdaptiveSamplingConfig) -> Result<VertexPolygon> {
    cfg.validate()?;
    let n = cfg.target_vertices;
    let dense = contour.densified(1.0);
    let v = dense.vertices();
    if v.len() < n {
        return Err(Error::DegenerateInput(format!(
            "contour has {} points after densification, need at least {n}",
            v.len()
        )));
    }
    let mut base = dominant_points(v, cfg.min_support, cfg.max_support);
    if base.len() > n {
        base = reduce_to_at_most(v, &base, n, cfg.epsilon_tolerance);
    }
    if base.len() < 2 {
        let a = base.first().copied().unwrap_or(0);
        let far = (0..v.len()).max_by(|&i, &j| v[a].dist(v[i]).total_cmp(&v[a].dist(v[j])).then(j.cmp(&i))).unwrap();
        base = vec![a, far];
        base.sort_unstable();
    }
    let weight: Vec<f64> = (0..v.len())
        .map(|i| local_curvature(&dense, i, WEIGHT_SUPPORT).sqrt() + WEIGHT_FLOOR)
        .collect();
    let m = base.len();
    let ends: Vec<(usize, usize)> = (0..m).map(|s| (base[s], base[(s + 1) % m])).collect();
    let mut parts = vec![1usize; m];
    let mut splits: Vec<Vec<Point2>> = vec![Vec::new(); m];
    let mut errors: Vec<f64> = ends.iter().map(|&(a, b)| span_error(v, a, b, &[])).collect();
    for _ in m..n {
        let s = (0..m).max_by(|&i, &j| errors[i].total_cmp(&errors[j]).then(j.cmp(&i))).unwrap();
        parts[s] += 1;
        let (a, b) = ends[s];
        splits[s] = weighted_splits(v, &weight, a, b, parts[s]);
        errors[s] = span_error(v, a, b, &splits[s]);
    }
    let mut pts = Vec::with_capacity(n);
    for s in 0..m {
        pts.push(v[ends[s].0]);
        pts.extend_from_slice(&splits[s]);
    }
    debug_assert_eq!(pts.len(), n);
    Ok(relative_to_centroid(contour, pts, SamplingKind::Adaptive))
}

fn sector_of(angle: f64, n: usize) -> usize {
    let w = TAU / n as f64;
    let a = (angle + 0.5 * w).rem_euclid(TAU);
    ((a / w).floor() as usize).min(n - 1)
}

/// Vertices per angular sector about the polygon origin.
pub fn sector_vertex_counts(poly: &VertexPolygon, n_sectors: usize) -> Vec<u32> {
    let n = n_sectors.max(1);
    let mut counts = vec![0u32; n];
    for p in &poly.vertices {
        counts[sector_of(p.angle(), n)] += 1;
    }
    counts
}

/// Polar encoding of a vertex polygon: per sector, the vertex count and the
/// farthest vertex as representative.
pub fn to_polar(poly: &VertexPolygon, n_sectors: usize) -> PolarPolygon {
    let n = n_sectors.max(1);
    let mut sectors = vec![PolarSector { r: 0.0, theta: 0.0, alpha: 0 }; n];
    for p in &poly.vertices {
        let s = &mut sectors[sector_of(p.angle(), n)];
        let r = p.norm();
        if s.alpha == 0 || r > s.r {
            s.r = r;
            s.theta = p.angle().rem_euclid(TAU);
        }
        s.alpha += 1;
    }
    PolarPolygon { center: poly.origin, sectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point_segment_distance;
    use std::f64::consts::PI;

    fn circle(r: f64, n: usize) -> Contour {
        Contour::new((0..n).map(|i| Point2::from_polar(r, i as f64 * TAU / n as f64)).collect()).unwrap()
    }

    fn square(h: f64) -> Contour {
        Contour::new(vec![Point2::new(-h, -h), Point2::new(h, -h), Point2::new(h, h), Point2::new(-h, h)]).unwrap()
    }

    /// Two semicircles of radius `r` joined by straight sides of length `l`.
    fn stadium(r: f64, l: f64) -> Contour {
        let mut v = Vec::new();
        for k in 0..=60 {
            let t = -PI / 2.0 + PI * k as f64 / 60.0;
            v.push(Point2::new(l / 2.0 + r * t.cos(), r * t.sin()));
        }
        for k in 0..=60 {
            let t = PI / 2.0 + PI * k as f64 / 60.0;
            v.push(Point2::new(-l / 2.0 + r * t.cos(), r * t.sin()));
        }
        Contour::new(v).unwrap()
    }

    fn on_boundary(c: &Contour, p: Point2) -> bool {
        (0..c.len()).any(|i| {
            let (a, b) = c.edge(i);
            point_segment_distance(p, a, b) < 1e-9
        })
    }

    #[test]
    fn angular_examples() {
        let p = sample_uniform_angular(&circle(10.0, 720), 16).unwrap();
        assert!(p.sectors.iter().all(|s| (s.r - 10.0).abs() < 1e-3 && s.alpha == 1));
        let p = sample_uniform_angular(&square(0.5), 8).unwrap();
        for (i, s) in p.sectors.iter().enumerate() {
            let want = if i % 2 == 0 { 0.5 } else { 0.5f64.sqrt() };
            assert!((s.r - want).abs() < 1e-12, "{i} {}", s.r);
        }
    }

    #[test]
    fn angular_crescent_takes_far_crossing() {
        // a thick C shape whose centroid is inside the left wall
        let mut v = Vec::new();
        for k in 0..=40 {
            let t = 0.6 + (TAU - 1.2) * k as f64 / 40.0;
            v.push(Point2::from_polar(10.0, t));
        }
        for k in 0..=40 {
            let t = TAU - 0.6 - (TAU - 1.2) * k as f64 / 40.0;
            v.push(Point2::from_polar(7.0, t));
        }
        let c = Contour::new(v).unwrap();
        match sample_uniform_angular(&c, 24) {
            Ok(p) => {
                let verts = p.vertices();
                assert!(verts.iter().all(|&q| on_boundary(&c, q)));
                assert!(Contour::new(verts).is_ok(), "reconstruction is simple");
            }
            Err(e) => assert_eq!(e, Error::CentroidOutside),
        }
        let thick: Vec<Point2> = (0..=40)
            .map(|k| Point2::from_polar(10.0, 1.2 + (TAU - 2.4) * k as f64 / 40.0))
            .chain((0..=40).map(|k| Point2::from_polar(2.0, TAU - 1.2 - (TAU - 2.4) * k as f64 / 40.0)))
            .collect();
        let c = Contour::new(thick).unwrap();
        let p = sample_uniform_angular(&c, 24).unwrap();
        assert!(Contour::new(p.vertices()).is_ok());
    }

    #[test]
    fn centroid_outside_rejected() {
        let v: Vec<Point2> = (0..=40)
            .map(|k| Point2::from_polar(10.0, 0.3 + (TAU - 0.6) * k as f64 / 40.0))
            .chain((0..=40).map(|k| Point2::from_polar(9.0, TAU - 0.3 - (TAU - 0.6) * k as f64 / 40.0)))
            .collect();
        assert_eq!(sample_uniform_angular(&Contour::new(v).unwrap(), 8), Err(Error::CentroidOutside));
    }

    #[test]
    fn perimeter_examples() {
        let sq = square(1.0);
        let p = sample_uniform_perimeter(&sq, 4).unwrap();
        for (a, b) in p.absolute_vertices().iter().zip(sq.vertices()) {
            assert!(a.dist(*b) < 1e-12);
        }
        let tri = Contour::new(vec![Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(1.0, 3f64.sqrt())]).unwrap();
        let p = sample_uniform_perimeter(&tri, 3).unwrap();
        for (a, b) in p.absolute_vertices().iter().zip(tri.vertices()) {
            assert!(a.dist(*b) < 1e-9);
        }
        assert!(sample_uniform_perimeter(&tri, 2).is_err());
    }

    #[test]
    fn adaptive_stadium_prefers_arcs() {
        let (r, l) = (20.0, 80.0);
        let c = stadium(r, l);
        let p = sample_adaptive(&c, &AdaptiveSamplingConfig::new(24)).unwrap();
        assert_eq!(p.vertices.len(), 24);
        let verts = p.absolute_vertices();
        assert!(verts.iter().all(|&q| on_boundary(&c, q)));
        let on_arc = verts.iter().filter(|q| q.x.abs() > l / 2.0 + 1e-6).count();
        let on_side = verts.iter().filter(|q| q.x.abs() < l / 2.0 - 1e-6).count();
        assert!(on_arc > on_side, "{on_arc} {on_side}");
        let counts = sector_vertex_counts(&p, 4);
        assert_eq!(counts.iter().sum::<u32>(), 24);
    }

    #[test]
    fn adaptive_circle_is_uniform() {
        let c = circle(40.0, 400);
        let p = sample_adaptive(&c, &AdaptiveSamplingConfig::new(24)).unwrap();
        let v = p.absolute_vertices();
        let gaps: Vec<f64> = (0..24).map(|i| v[i].dist(v[(i + 1) % 24])).collect();
        let (lo, hi) = gaps.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &g| (a.min(g), b.max(g)));
        assert!(hi / lo < 1.5, "{hi} / {lo}");
    }

    #[test]
    fn adaptive_keeps_square_corners() {
        let c = square(20.0);
        let p = sample_adaptive(&c, &AdaptiveSamplingConfig::new(4)).unwrap();
        let mut got = p.absolute_vertices();
        got.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        let mut want = c.vertices().to_vec();
        want.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        for (a, b) in got.iter().zip(&want) {
            assert!(a.dist(*b) < 1e-9, "{got:?}");
        }
    }

    #[test]
    fn adaptive_rejects_short_contours() {
        let tri = Contour::new(vec![Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(0.0, 2.0)]).unwrap();
        assert!(sample_adaptive(&tri, &AdaptiveSamplingConfig::new(24)).is_err());
        assert!(sample_adaptive(&square(10.0), &AdaptiveSamplingConfig::new(3)).is_err());
    }

    #[test]
    fn sector_counts() {
        let p = sample_uniform_angular(&circle(10.0, 360), 12).unwrap();
        let poly = VertexPolygon {
            origin: p.center,
            vertices: p.vertices().into_iter().map(|q| q - p.center).collect(),
            sampling_kind: SamplingKind::UniformPerimeter,
        };
        assert_eq!(sector_vertex_counts(&poly, 12), vec![1; 12]);
        let half = VertexPolygon {
            origin: Point2::default(),
            vertices: vec![Point2::new(1.0, 0.5), Point2::new(0.2, -1.0), Point2::new(0.1, 1.0)],
            sampling_kind: SamplingKind::Adaptive,
        };
        assert_eq!(sector_vertex_counts(&half, 2), vec![3, 0]);
    }

    #[test]
    fn polar_reconstruction_matches_angular_sampler() {
        let c = stadium(15.0, 30.0);
        let p = sample_uniform_angular(&c, 24).unwrap();
        let rebuilt = PolarPolygon {
            center: p.center,
            sectors: (0..24)
                .map(|i| PolarSector { r: p.sectors[i].r, theta: i as f64 * TAU / 24.0, alpha: 1 })
                .collect(),
        };
        assert_eq!(rebuilt.vertices(), p.vertices());
    }

    #[test]
    fn to_polar_counts_and_representatives() {
        let c = stadium(15.0, 30.0);
        let poly = sample_uniform_perimeter(&c, 24).unwrap();
        let polar = to_polar(&poly, 8);
        assert_eq!(polar.sectors.iter().map(|s| s.alpha).sum::<u32>(), 24);
        for (s, i) in polar.sectors.iter().zip(0..) {
            if s.alpha > 0 {
                assert_eq!(sector_of(s.theta, 8), i);
            }
        }
    }
}
