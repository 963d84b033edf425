//! Planar Laguerre (power) diagrams.
//!
//! A generator `(x, h)` claims the points `y` where its power distance
//! `|y - x|^2 + h` is smallest. Each cell is built by clipping the clip
//! rectangle with the power bisectors of nearby generators, working in
//! coordinates centred on the generator so that far-away windows do not cost
//! precision. A bucket grid supplies neighbours ring by ring, and the search
//! stops once no farther generator can reach the current polygon.

mod grid;
mod polygon;

pub use grid::SpatialGrid;
pub use polygon::{contains_ccw, ConvexPolygon, Point};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for predicate comparisons and vertex merging.
pub const EPS: f64 = 1e-9;

/// Cells with a smaller clipped area are reported as empty.
pub const SLIVER_AREA: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub x: Vec<f64>,
    pub h: f64,
}

impl WeightedPoint {
    pub fn new(x: impl Into<Vec<f64>>, h: f64) -> Self {
        Self { x: x.into(), h }
    }

    pub fn planar(x: f64, y: f64, h: f64) -> Self {
        Self { x: vec![x, y], h }
    }

    fn xy(&self) -> Result<Point> {
        match self.x.as_slice() {
            &[a, b] => Ok([a, b]),
            other => Err(Error::Dimension {
                expected: 2,
                found: other.len(),
            }),
        }
    }
}

/// `{y : normal·y <= offset}` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: [f64; 2],
    pub offset: f64,
}

impl HalfPlane {
    /// Normalises `normal` to unit length.
    pub fn new(normal: [f64; 2], offset: f64) -> Self {
        let len = normal[0].hypot(normal[1]);
        assert!(len > 0.0, "half-plane normal must be nonzero");
        Self {
            normal: [normal[0] / len, normal[1] / len],
            offset: offset / len,
        }
    }

    /// Signed distance past the boundary (positive outside).
    pub fn excess(&self, y: Point) -> f64 {
        self.normal[0] * y[0] + self.normal[1] * y[1] - self.offset
    }

    pub fn contains(&self, y: Point) -> bool {
        self.excess(y) <= EPS
    }
}

/// Axis-aligned rectangle `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        if !(xmin < xmax && ymin < ymax) || ![xmin, ymin, xmax, ymax].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid(format!(
                "degenerate rectangle [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        Ok(Self {
            min: [xmin, ymin],
            max: [xmax, ymax],
        })
    }

    pub fn square(center: Point, side: f64) -> Result<Self> {
        let r = side / 2.0;
        Self::new(center[0] - r, center[1] - r, center[0] + r, center[1] + r)
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }

    pub fn dilate(&self, by: f64) -> Self {
        Self {
            min: [self.min[0] - by, self.min[1] - by],
            max: [self.max[0] + by, self.max[1] + by],
        }
    }

    /// Shrinks by `by` on every side; `None` when nothing is left.
    pub fn erode(&self, by: f64) -> Option<Self> {
        Self::new(self.min[0] + by, self.min[1] + by, self.max[0] - by, self.max[1] - by).ok()
    }

    fn translated(&self, by: Point) -> Self {
        Self {
            min: [self.min[0] + by[0], self.min[1] + by[1]],
            max: [self.max[0] + by[0], self.max[1] + by[1]],
        }
    }

    /// Whether `p` lies on the boundary within `tol`.
    pub fn on_boundary(&self, p: Point, tol: f64) -> bool {
        (p[0] - self.min[0]).abs() <= tol
            || (p[0] - self.max[0]).abs() <= tol
            || (p[1] - self.min[1]).abs() <= tol
            || (p[1] - self.max[1]).abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreCell {
    pub index: usize,
    /// Counterclockwise vertices in global coordinates; empty for an empty cell.
    pub polygon: Vec<Point>,
    pub area: f64,
    pub is_empty: bool,
    pub contains_own_generator: bool,
    pub touches_clip_boundary: bool,
}

impl LaguerreCell {
    pub fn contains(&self, y: Point, tol: f64) -> bool {
        contains_ccw(&self.polygon, y, tol)
    }
}

#[derive(Debug, Clone)]
pub struct Tessellation {
    pub cells: Vec<LaguerreCell>,
    pub clip: Rect,
}

impl Tessellation {
    pub fn total_area(&self) -> f64 {
        crate::numeric::compensated_sum(self.cells.iter().map(|c| c.area))
    }

    pub fn nonempty(&self) -> impl Iterator<Item = &LaguerreCell> {
        self.cells.iter().filter(|c| !c.is_empty)
    }
}

/// The power bisector of `a` against `b`: the points weakly closer to `a`
/// in power distance.
pub fn power_bisector(a: &WeightedPoint, b: &WeightedPoint) -> Result<HalfPlane> {
    let (xa, xb) = (a.xy()?, b.xy()?);
    if xa == xb {
        return Err(Error::CoincidentGenerators {
            first: 0,
            second: 1,
            position: a.x.clone(),
        });
    }
    let n = [2.0 * (xb[0] - xa[0]), 2.0 * (xb[1] - xa[1])];
    let c = xb[0] * xb[0] + xb[1] * xb[1] - xa[0] * xa[0] - xa[1] * xa[1] + b.h - a.h;
    Ok(HalfPlane::new(n, c))
}

/// Bisector of generator `j` against the generator at the local origin,
/// where `d = x_j - x_i` and `dh = h_j - h_i`.
fn local_bisector(d: Point, dh: f64) -> HalfPlane {
    let len = d[0].hypot(d[1]);
    HalfPlane {
        normal: [d[0] / len, d[1] / len],
        offset: (len * len + dh) / (2.0 * len),
    }
}

struct Sites {
    xy: Vec<Point>,
    h: Vec<f64>,
}

impl Sites {
    fn new(points: &[WeightedPoint]) -> Result<Self> {
        let xy = points.iter().map(WeightedPoint::xy).collect::<Result<Vec<_>>>()?;
        let h = points.iter().map(|p| p.h).collect();
        Ok(Self { xy, h })
    }
}

fn finish_cell(i: usize, mut poly: ConvexPolygon, origin: Point, clip: &Rect, own: bool) -> LaguerreCell {
    let area = poly.area();
    if poly.is_empty() || area < SLIVER_AREA {
        return LaguerreCell {
            index: i,
            polygon: Vec::new(),
            area: 0.0,
            is_empty: true,
            contains_own_generator: false,
            touches_clip_boundary: false,
        };
    }
    poly.translate(origin);
    let tol = EPS * (1.0 + clip.width().max(clip.height()));
    let touches = poly.vertices().iter().any(|&v| clip.on_boundary(v, tol));
    LaguerreCell {
        index: i,
        polygon: poly.into_vertices(),
        area,
        is_empty: false,
        contains_own_generator: own,
        touches_clip_boundary: touches,
    }
}

/// Cell of generator `i` by clipping against every other generator.
pub fn laguerre_cell(i: usize, points: &[WeightedPoint], clip: &Rect) -> Result<LaguerreCell> {
    let sites = Sites::new(points)?;
    let own = contains_own_generator(i, points);
    let xi = sites.xy[i];
    let mut poly = ConvexPolygon::from_rect(&clip.translated([-xi[0], -xi[1]]));
    for j in 0..points.len() {
        if j == i {
            continue;
        }
        let d = [sites.xy[j][0] - xi[0], sites.xy[j][1] - xi[1]];
        if d == [0.0, 0.0] {
            if sites.h[j] < sites.h[i] {
                poly = ConvexPolygon::empty();
                break;
            }
            continue;
        }
        poly.clip(&local_bisector(d, sites.h[j] - sites.h[i]));
        if poly.is_empty() {
            break;
        }
    }
    Ok(finish_cell(i, poly, xi, clip, own))
}

/// True iff no generator `j` has `h_i - h_j > |x_i - x_j|^2`, i.e. the
/// generator lies in its own cell.
pub fn contains_own_generator(i: usize, points: &[WeightedPoint]) -> bool {
    let (xi, hi) = (&points[i].x, points[i].h);
    points.iter().enumerate().all(|(j, p)| {
        j == i || {
            let d2: f64 = xi.iter().zip(&p.x).map(|(a, b)| (a - b) * (a - b)).sum();
            hi - p.h <= d2
        }
    })
}

/// Index minimising the power distance from `y`; ties go to the lowest index.
pub fn locate(y: Point, points: &[WeightedPoint]) -> usize {
    assert!(!points.is_empty(), "locate needs at least one generator");
    let mut best = (f64::INFINITY, 0);
    for (i, p) in points.iter().enumerate() {
        let pw = (y[0] - p.x[0]).powi(2) + (y[1] - p.x[1]).powi(2) + p.h;
        if pw < best.0 {
            best = (pw, i);
        }
    }
    best.1
}

fn check_distinct(points: &[WeightedPoint]) -> Result<()> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    let key = |i: usize| (points[i].x[0], points[i].x.get(1).copied().unwrap_or(0.0));
    order.sort_by(|&a, &b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    for w in order.windows(2) {
        if points[w[0]].x == points[w[1]].x {
            let (first, second) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::CoincidentGenerators {
                first,
                second,
                position: points[first].x.clone(),
            });
        }
    }
    Ok(())
}

/// Own-cell flags for all generators at once, using a grid so that only
/// generators within `sqrt(h_i - h_min)` are examined.
pub fn own_cell_flags(points: &[WeightedPoint]) -> Result<Vec<bool>> {
    let sites = Sites::new(points)?;
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let grid = SpatialGrid::new(&sites.xy, 2.0);
    let h_min = sites.h.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((0..points.len())
        .into_par_iter()
        .map(|i| own_cell_flag(i, &sites, &grid, h_min))
        .collect())
}

fn own_cell_flag(i: usize, sites: &Sites, grid: &SpatialGrid, h_min: f64) -> bool {
    let (xi, hi) = (sites.xy[i], sites.h[i]);
    let reach = (hi - h_min).max(0.0).sqrt();
    let last = grid.max_ring(xi);
    let mut own = true;
    for ring in 0..=last {
        if (ring as f64 - 1.0) * grid.cell_size() > reach {
            break;
        }
        grid.for_each_in_ring(xi, ring, |j| {
            if j != i {
                let d2 = (sites.xy[j][0] - xi[0]).powi(2) + (sites.xy[j][1] - xi[1]).powi(2);
                if hi - sites.h[j] > d2 {
                    own = false;
                }
            }
        });
        if !own {
            break;
        }
    }
    own
}

/// All cells, clipped to `clip`, computed in parallel.
pub fn tessellate(points: &[WeightedPoint], clip: &Rect) -> Result<Tessellation> {
    check_distinct(points)?;
    let sites = Sites::new(points)?;
    let own = own_cell_flags(points)?;
    let grid = SpatialGrid::new(&sites.xy, 2.0);
    let h_min = sites.h.iter().copied().fold(f64::INFINITY, f64::min);
    let cells = (0..points.len())
        .into_par_iter()
        .map(|i| grid_cell(i, &sites, &grid, h_min, clip, own[i]))
        .collect();
    Ok(Tessellation { cells, clip: *clip })
}

fn grid_cell(i: usize, sites: &Sites, grid: &SpatialGrid, h_min: f64, clip: &Rect, own: bool) -> LaguerreCell {
    let (xi, hi) = (sites.xy[i], sites.h[i]);
    let mut poly = ConvexPolygon::from_rect(&clip.translated([-xi[0], -xi[1]]));
    let last = grid.max_ring(xi);
    for ring in 0..=last {
        grid.for_each_in_ring(xi, ring, |j| {
            if j != i && !poly.is_empty() {
                let d = [sites.xy[j][0] - xi[0], sites.xy[j][1] - xi[1]];
                poly.clip(&local_bisector(d, sites.h[j] - hi));
            }
        });
        if poly.is_empty() {
            break;
        }
        // A generator at distance r can only cut the polygon if its bisector
        // offset (r^2 + h_j - h_i) / 2r is below the polygon radius R.
        let r = poly.max_radius();
        let reach = r + (r * r + hi - h_min).max(0.0).sqrt();
        if ring as f64 * grid.cell_size() > reach {
            break;
        }
    }
    finish_cell(i, poly, xi, clip, own)
}
