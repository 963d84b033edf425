//! Unfolding the spatial weight distribution `H` from planar sections.
//!
//! A planar section of a 3D Poisson–Laguerre tessellation is again
//! Poisson–Laguerre, with weight distribution `F(z) = 2 int sqrt(z - h) dH(h)`.
//! Inverting this Abel equation directly (the plug-in estimator) is unstable:
//! it is infinite at every jump of the estimated `F`. Instead we integrate
//! once more,
//!
//! ```text
//! U(z) = (2/pi) int sqrt(z - t) dF(t) = int_0^z H(t) dt,
//! ```
//!
//! which is convex, and estimate `H` as the slope of the greatest convex
//! minorant of the empirical `U_n`. Because `U_n` is concave between its
//! knots, that slope is the weighted isotonic regression of the chord
//! slopes, computed with pool-adjacent-violators.

use std::f64::consts::PI;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::numeric::{CompensatedSum, ExtReal};
use crate::stepfn::StepCdf;

/// `F(z) = 2 sum ΔH_j sqrt(z - h_j)_+`.
pub fn abel_forward(h: &StepCdf, z: f64) -> f64 {
    2.0 * h.weighted_stieltjes(z, |t| (z - t).sqrt())
}

/// Plug-in inverse `(1/pi) sum_{h_j < z} ΔF_j / sqrt(z - h_j)`; infinite at
/// jump locations.
pub fn plugin_h(fbar: &StepCdf, z: f64) -> ExtReal {
    if fbar.jumps().any(|(h, dv)| h == z && dv > 0.0) {
        return ExtReal::Infinite;
    }
    let v = fbar.weighted_stieltjes(z, |t| if t < z { 1.0 / (z - t).sqrt() } else { 0.0 });
    ExtReal::Finite(v / PI)
}

/// `U_n(z) = (2/pi) sum ΔF_j sqrt(z - h_j)_+`.
pub fn u_n(fbar: &StepCdf, z: f64) -> f64 {
    2.0 / PI * fbar.weighted_stieltjes(z, |t| (z - t).sqrt())
}

/// Weighted least squares over nonnegative nondecreasing sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicProblem {
    pub y: Vec<f64>,
    pub w: Vec<f64>,
}

impl IsotonicProblem {
    pub fn new(y: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if y.len() != w.len() {
            return Err(Error::invalid("isotonic problem: y and w differ in length"));
        }
        if let Some(bad) = w.iter().find(|&&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::invalid(format!("isotonic problem: weight {bad} is not positive")));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("isotonic problem: non-finite response"));
        }
        Ok(Self { y, w })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// `sum w_i (beta_i - y_i)^2`.
    pub fn objective(&self, beta: &[f64]) -> f64 {
        self.y
            .iter()
            .zip(&self.w)
            .zip(beta)
            .map(|((y, w), b)| w * (b - y) * (b - y))
            .collect::<CompensatedSum>()
            .value()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicFit {
    pub beta: Vec<f64>,
    /// Pooled index ranges, in order.
    pub blocks: Vec<Range<usize>>,
}

/// Pool-adjacent-violators, then negative blocks raised to zero.
pub fn pava(p: &IsotonicProblem) -> IsotonicFit {
    struct Block {
        start: usize,
        end: usize,
        wsum: f64,
        mean: f64,
    }
    let mut stack: Vec<Block> = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        let mut b = Block {
            start: i,
            end: i + 1,
            wsum: p.w[i],
            mean: p.y[i],
        };
        while let Some(top) = stack.last() {
            if top.mean < b.mean {
                break;
            }
            let top = stack.pop().unwrap();
            let wsum = top.wsum + b.wsum;
            b = Block {
                start: top.start,
                end: b.end,
                mean: (top.mean * top.wsum + b.mean * b.wsum) / wsum,
                wsum,
            };
        }
        stack.push(b);
    }
    let mut beta = vec![0.0; p.len()];
    let mut blocks = Vec::with_capacity(stack.len());
    for b in &stack {
        beta[b.start..b.end].fill(b.mean.max(0.0));
        blocks.push(b.start..b.end);
    }
    IsotonicFit { beta, blocks }
}

/// Chord slopes of `U_n` between consecutive jump locations of `fbar`.
pub fn chord_slopes(fbar: &StepCdf) -> Result<IsotonicProblem> {
    let k = fbar.len();
    if k < 2 {
        return Err(Error::TooFewJumps { needed: 2, found: k });
    }
    let h = fbar.locations();
    let u: Vec<f64> = h.iter().map(|&z| u_n(fbar, z)).collect();
    let w: Vec<f64> = h.windows(2).map(|s| s[1] - s[0]).collect();
    let y = (0..k - 1).map(|i| (u[i + 1] - u[i]) / w[i]).collect();
    IsotonicProblem::new(y, w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicResult {
    /// Fit over the segments `[0, h_1), [h_1, h_2), ..` up to `z_m`; the
    /// first entry is the zero anchor at the origin.
    pub fit: IsotonicFit,
    /// Left ends of the fitted segments (starting with 0).
    pub knots: Vec<f64>,
    pub h: StepCdf,
    pub z_m: f64,
}

impl IsotonicResult {
    /// The greatest convex minorant of `U_n` on `[0, z_m]`, evaluated at `z`.
    pub fn minorant(&self, z: f64) -> f64 {
        let z = z.clamp(0.0, self.z_m);
        let mut acc = CompensatedSum::new();
        for (i, &left) in self.knots.iter().enumerate() {
            if left >= z {
                break;
            }
            let right = self.knots.get(i + 1).copied().unwrap_or(self.z_m).min(z);
            acc.add(self.fit.beta[i] * (right - left));
        }
        acc.value()
    }
}

/// Isotonic estimator of `H`: the right derivative of the greatest convex
/// minorant of `U_n` on `[0, min(h_k, M)]`, held constant beyond.
/// `m = None` means `M = inf`.
pub fn isotonic_h(fbar: &StepCdf, m: Option<f64>) -> Result<IsotonicResult> {
    let k = fbar.len();
    if k < 2 {
        return Err(Error::TooFewJumps { needed: 2, found: k });
    }
    if let Some(m) = m {
        if m.is_nan() || m <= 0.0 {
            return Err(Error::invalid(format!("truncation M = {m} must be positive")));
        }
    }
    let h = fbar.locations();
    let z_m = m.map_or(h[k - 1], |m| m.min(h[k - 1]));

    let mut knots = vec![0.0];
    let mut ends = Vec::new();
    for &hi in h {
        if hi >= z_m {
            break;
        }
        ends.push(hi);
        knots.push(hi);
    }
    ends.push(z_m);
    let u: Vec<f64> = ends.iter().map(|&z| u_n(fbar, z)).collect();
    let mut y = Vec::with_capacity(knots.len());
    let mut w = Vec::with_capacity(knots.len());
    let mut prev_u = 0.0;
    for (i, &left) in knots.iter().enumerate() {
        let width = ends[i] - left;
        y.push((u[i] - prev_u) / width);
        w.push(width);
        prev_u = u[i];
    }
    let problem = IsotonicProblem::new(y, w)?;
    let fit = pava(&problem);
    let est = StepCdf::new(knots.iter().copied().zip(fit.beta.iter().copied()).skip(1))?;
    Ok(IsotonicResult {
        fit,
        knots,
        h: est,
        z_m,
    })
}

/// Vertices of the greatest convex minorant (lower convex hull) of the
/// points `(x_i, y_i)`, with `x` strictly increasing.
pub fn greatest_convex_minorant(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b if it lies on or above the segment a -> p
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Piecewise-linear interpolation through `vertices` (sorted by `x`).
pub fn interpolate(vertices: &[(f64, f64)], x: f64) -> f64 {
    let i = vertices.partition_point(|v| v.0 <= x);
    match i {
        0 => vertices[0].1,
        n if n == vertices.len() => vertices[n - 1].1,
        _ => {
            let (a, b) = (vertices[i - 1], vertices[i]);
            a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
        }
    }
}
