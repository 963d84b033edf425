use super::polygon::Point;

/// Bucket grid over planar positions for ring-by-ring neighbour search.
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl SpatialGrid {
    /// Builds a grid with roughly `per_cell` points per bucket.
    pub fn new(points: &[Point], per_cell: f64) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if points.is_empty() {
            lo = [0.0; 2];
            hi = [1.0; 2];
        }
        let (w, h) = ((hi[0] - lo[0]).max(1e-12), (hi[1] - lo[1]).max(1e-12));
        let n = points.len().max(1) as f64;
        let mut cell = (w * h * per_cell / n).sqrt();
        if !(cell.is_finite() && cell > 0.0) {
            cell = w.max(h);
        }
        // keep bucket count bounded for very elongated sets
        cell = cell.max(w.max(h) / 4096.0);
        let nx = ((w / cell).floor() as usize + 1).max(1);
        let ny = ((h / cell).floor() as usize + 1).max(1);

        let mut counts = vec![0usize; nx * ny + 1];
        let bucket = |p: &Point| {
            let cx = (((p[0] - lo[0]) / cell) as usize).min(nx - 1);
            let cy = (((p[1] - lo[1]) / cell) as usize).min(ny - 1);
            cy * nx + cx
        };
        for p in points {
            counts[bucket(p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut items = vec![0; points.len()];
        for (i, p) in points.iter().enumerate() {
            let b = bucket(p);
            items[fill[b]] = i;
            fill[b] += 1;
        }
        Self {
            origin: lo,
            cell,
            nx,
            ny,
            start: counts,
            items,
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    fn coords(&self, p: Point) -> (isize, isize) {
        (
            ((p[0] - self.origin[0]) / self.cell).floor() as isize,
            ((p[1] - self.origin[1]) / self.cell).floor() as isize,
        )
    }

    /// Largest ring index that still intersects the grid from `p`.
    pub fn max_ring(&self, p: Point) -> usize {
        let (cx, cy) = self.coords(p);
        let nx = self.nx as isize;
        let ny = self.ny as isize;
        [cx, nx - 1 - cx, cy, ny - 1 - cy]
            .into_iter()
            .map(|v| v.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Visits the point indices in the buckets at Chebyshev ring distance
    /// `ring` from the bucket containing `p`. Every such point is at least
    /// `(ring - 1) * cell_size()` away from `p`.
    pub fn for_each_in_ring(&self, p: Point, ring: usize, mut f: impl FnMut(usize)) {
        let (cx, cy) = self.coords(p);
        let r = ring as isize;
        let mut visit = |x: isize, y: isize| {
            if x < 0 || y < 0 || x >= self.nx as isize || y >= self.ny as isize {
                return;
            }
            let b = y as usize * self.nx + x as usize;
            for &i in &self.items[self.start[b]..self.start[b + 1]] {
                f(i);
            }
        };
        if r == 0 {
            visit(cx, cy);
            return;
        }
        for x in (cx - r)..=(cx + r) {
            visit(x, cy - r);
            visit(x, cy + r);
        }
        for y in (cy - r + 1)..(cy + r) {
            visit(cx - r, y);
            visit(cx + r, y);
        }
    }
}
