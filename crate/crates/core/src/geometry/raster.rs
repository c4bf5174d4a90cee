use super::{bounds, Contour, Point2};
use crate::error::{Error, Result};

/// Pixel grid placement: grid coordinates are `(p - origin) * resolution`;
/// pixel `(i, j)` covers `[i, i+1) x [j, j+1)` and is sampled at its center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec2D {
    pub resolution: f64,
    pub origin: Point2,
    pub width: usize,
    pub height: usize,
}

impl GridSpec2D {
    /// Native image grid: one pixel per unit, origin at the image corner.
    pub fn native(width: usize, height: usize) -> Self {
        Self { resolution: 1.0, origin: Point2::default(), width, height }
    }

    /// A grid covering `[lo, hi]` whose longest side has `longest` pixels.
    pub fn covering(lo: Point2, hi: Point2, longest: usize) -> Self {
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
        let resolution = longest as f64 / span;
        let width = (((hi.x - lo.x) * resolution).ceil() as usize).max(1);
        let height = (((hi.y - lo.y) * resolution).ceil() as usize).max(1);
        Self { resolution, origin: lo, width, height }
    }

    pub fn to_grid(&self, p: Point2) -> Point2 {
        (p - self.origin) * self.resolution
    }

    fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0) || self.width == 0 || self.height == 0 {
            return Err(Error::DegenerateInput(format!("invalid grid {self:?}")));
        }
        Ok(())
    }
}

/// Row-major foreground bitmap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DegenerateInput(format!("mask dimensions {width}x{height}")));
        }
        Ok(Self { width, height, bits: vec![false; width * height] })
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || bits.len() != width * height {
            return Err(Error::DegenerateInput(format!(
                "mask {width}x{height} with {} bits",
                bits.len()
            )));
        }
        Ok(Self { width, height, bits })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Binary PGM (P5) with foreground 255.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.bits.iter().map(|&b| if b { 255u8 } else { 0 }));
        out
    }

    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::Parse("truncated PGM header".into()));
            }
            fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
        pos += 1;
        if fields[0] != "P5" {
            return Err(Error::Parse(format!("unsupported PGM magic {}", fields[0])));
        }
        let parse = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("PGM header: {e}")));
        let (w, h) = (parse(&fields[1])?, parse(&fields[2])?);
        let data = bytes.get(pos..pos + w * h).ok_or_else(|| Error::Parse("truncated PGM data".into()))?;
        Self::from_bits(w, h, data.iter().map(|&b| b > 127).collect())
    }
}

/// Calls `f(row, x_begin, x_end)` for every horizontal run of pixels whose
/// centers are inside the polygon under the even-odd rule, clipped to the
/// grid. Crossings use the same arithmetic as the PNPOLY test.
fn for_each_span(points: &[Point2], grid: &GridSpec2D, mut f: impl FnMut(usize, usize, usize)) {
    let n = points.len();
    if n < 3 {
        return;
    }
    let g: Vec<Point2> = points.iter().map(|&p| grid.to_grid(p)).collect();
    let (lo, hi) = bounds(&g);
    if !(lo.y.is_finite() && hi.y.is_finite()) {
        return;
    }
    let row0 = (lo.y - 0.5).ceil().max(0.0) as usize;
    let row1 = ((hi.y - 0.5).floor() + 1.0).clamp(0.0, grid.height as f64) as usize;
    let mut xs: Vec<f64> = Vec::with_capacity(16);
    for row in row0..row1 {
        let yc = row as f64 + 0.5;
        xs.clear();
        let mut j = n - 1;
        for i in 0..n {
            let a = g[i];
            let b = g[j];
            if (a.y > yc) != (b.y > yc) {
                xs.push(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
            }
            j = i;
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let x0 = (pair[0] - 0.5).ceil().clamp(0.0, grid.width as f64) as usize;
            let x1 = (pair[1] - 0.5).ceil().clamp(0.0, grid.width as f64) as usize;
            if x1 > x0 {
                f(row, x0, x1);
            }
        }
    }
}

/// Pixel-center even-odd rasterization. Every vertex must lie inside the
/// grid.
pub fn rasterize_polygon(contour: &Contour, grid: &GridSpec2D) -> Result<BinaryMask> {
    grid.validate()?;
    for &p in contour.vertices() {
        let q = grid.to_grid(p);
        let eps = 1e-9;
        if q.x < -eps || q.y < -eps || q.x > grid.width as f64 + eps || q.y > grid.height as f64 + eps {
            return Err(Error::OutOfBounds { x: p.x, y: p.y, width: grid.width, height: grid.height });
        }
    }
    rasterize_clipped(contour.vertices(), grid)
}

/// Same rule as [`rasterize_polygon`] for an arbitrary vertex loop; the parts
/// outside the grid are clipped away.
pub fn rasterize_clipped(points: &[Point2], grid: &GridSpec2D) -> Result<BinaryMask> {
    grid.validate()?;
    let mut mask = BinaryMask::new(grid.width, grid.height)?;
    for_each_span(points, grid, |row, x0, x1| {
        let base = row * grid.width;
        mask.bits[base + x0..base + x1].iter_mut().for_each(|b| *b = true);
    });
    Ok(mask)
}

/// `|A ∩ B| / |A ∪ B|`.
pub fn mask_iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch(a.dims(), b.dims()));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.bits.iter().zip(&b.bits) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        return Err(Error::BothEmpty);
    }
    Ok(inter as f64 / union as f64)
}

/// `(|P ∩ M|, |P|)` for polygon `P` rasterized on `grid` against `mask`,
/// without materializing the polygon mask.
pub fn polygon_mask_counts(points: &[Point2], grid: &GridSpec2D, mask: &BinaryMask) -> Result<(usize, usize)> {
    if (grid.width, grid.height) != mask.dims() {
        return Err(Error::DimensionMismatch((grid.width, grid.height), mask.dims()));
    }
    let (mut inter, mut count) = (0usize, 0usize);
    for_each_span(points, grid, |row, x0, x1| {
        let base = row * grid.width;
        count += x1 - x0;
        inter += mask.bits[base + x0..base + x1].iter().filter(|&&b| b).count();
    });
    Ok((inter, count))
}

/// Mask IoU of a polygon against a mask; identical to rasterizing the
/// polygon with [`rasterize_clipped`] and calling [`mask_iou`].
pub fn polygon_mask_iou(points: &[Point2], grid: &GridSpec2D, mask: &BinaryMask, mask_count: usize) -> Result<f64> {
    let (inter, count) = polygon_mask_counts(points, grid, mask)?;
    let union = count + mask_count - inter;
    if union == 0 {
        return Err(Error::BothEmpty);
    }
    Ok(inter as f64 / union as f64)
}

/// Mask IoU of two polygons on a grid covering both, `longest` pixels along
/// its longer side.
pub fn polygon_pair_iou(a: &[Point2], b: &[Point2], longest: usize) -> Result<f64> {
    let (la, ha) = bounds(a);
    let (lb, hb) = bounds(b);
    let lo = Point2::new(la.x.min(lb.x), la.y.min(lb.y));
    let hi = Point2::new(ha.x.max(hb.x), ha.y.max(hb.y));
    let grid = GridSpec2D::covering(lo, hi, longest);
    let ma = rasterize_clipped(a, &grid)?;
    let mb = rasterize_clipped(b, &grid)?;
    mask_iou(&ma, &mb)
}
