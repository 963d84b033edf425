use super::{HalfPlane, Rect, EPS};

pub type Point = [f64; 2];

/// Counterclockwise convex polygon, clipped incrementally by half-planes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    pub fn from_rect(r: &Rect) -> Self {
        Self {
            vertices: vec![
                [r.min[0], r.min[1]],
                [r.max[0], r.min[1]],
                [r.max[0], r.max[1]],
                [r.min[0], r.max[1]],
            ],
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point> {
        self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    pub fn translate(&mut self, by: Point) {
        for v in &mut self.vertices {
            v[0] += by[0];
            v[1] += by[1];
        }
    }

    /// Shoelace area (positive for counterclockwise order).
    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    /// Largest vertex distance from the origin.
    pub fn max_radius(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| v[0].hypot(v[1]))
            .fold(0.0, f64::max)
    }

    /// One Sutherland–Hodgman pass against `{y : n·y <= c}`. Vertices within
    /// `EPS` of the line count as inside; near-duplicate output vertices are
    /// merged.
    pub fn clip(&mut self, hp: &HalfPlane) {
        if self.is_empty() {
            self.vertices.clear();
            return;
        }
        let side: Vec<f64> = self.vertices.iter().map(|v| hp.excess(*v)).collect();
        if side.iter().all(|&s| s <= EPS) {
            return;
        }
        if side.iter().all(|&s| s > -EPS) {
            self.vertices.clear();
            return;
        }
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let j = (i + 1) % n;
            let (a, b) = (self.vertices[i], self.vertices[j]);
            let (sa, sb) = (side[i], side[j]);
            if sa <= EPS {
                push_distinct(&mut out, a);
            }
            if (sa < -EPS && sb > EPS) || (sa > EPS && sb < -EPS) {
                let t = sa / (sa - sb);
                push_distinct(&mut out, [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        if out.len() > 1 && close(out[0], *out.last().unwrap()) {
            out.pop();
        }
        self.vertices = out;
        if self.vertices.len() < 3 {
            self.vertices.clear();
        }
    }

    /// Membership with a boundary tolerance `tol`.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        contains_ccw(&self.vertices, p, tol)
    }
}

pub(crate) fn shoelace(vs: &[Point]) -> f64 {
    if vs.len() < 3 {
        return 0.0;
    }
    let n = vs.len();
    let mut s = 0.0;
    for i in 0..n {
        let (a, b) = (vs[i], vs[(i + 1) % n]);
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s
}

/// Point-in-convex-polygon test for counterclockwise vertices.
pub fn contains_ccw(vs: &[Point], p: Point, tol: f64) -> bool {
    if vs.len() < 3 {
        return false;
    }
    let n = vs.len();
    (0..n).all(|i| {
        let (a, b) = (vs[i], vs[(i + 1) % n]);
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let len = ex.hypot(ey);
        if len == 0.0 {
            return true;
        }
        // signed distance of p to the left of edge a->b
        (ex * (p[1] - a[1]) - ey * (p[0] - a[0])) / len >= -tol
    })
}

fn close(a: Point, b: Point) -> bool {
    (a[0] - b[0]).abs() <= EPS && (a[1] - b[1]).abs() <= EPS
}

fn push_distinct(out: &mut Vec<Point>, p: Point) {
    if out.last().is_none_or(|&q| !close(p, q)) {
        out.push(p);
    }
}
