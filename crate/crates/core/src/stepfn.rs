//! Right-continuous, nondecreasing step functions on `(0, inf)`.
//!
//! Every distribution function in the crate (true, estimated or transformed)
//! is carried as a [`StepCdf`]. All integrals against such functions are
//! evaluated exactly as finite sums; nothing here touches quadrature.

use crate::error::{Error, Result};
use crate::numeric::{CompensatedSum, ExtReal};

/// A nonnegative, nondecreasing, right-continuous step function, zero to the
/// left of its first jump.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepCdf {
    locs: Vec<f64>,
    vals: Vec<f64>,
}

impl StepCdf {
    /// The zero function.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a step function from `(location, cumulative value)` pairs in any
    /// order. Pairs sharing a location are merged, keeping the cumulative value
    /// that appears last in the input.
    pub fn new(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = points.into_iter().collect();
        for &(h, v) in &pts {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidStepFunction(format!(
                    "jump location {h} is not a positive finite number"
                )));
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidStepFunction(format!(
                    "value {v} at h = {h} is not a nonnegative finite number"
                )));
            }
        }
        // stable, so equal locations keep their input order
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut locs: Vec<f64> = Vec::with_capacity(pts.len());
        let mut vals: Vec<f64> = Vec::with_capacity(pts.len());
        for (h, v) in pts {
            if locs.last() == Some(&h) {
                *vals.last_mut().unwrap() = v;
            } else {
                locs.push(h);
                vals.push(v);
            }
        }
        for i in 1..vals.len() {
            if vals[i] < vals[i - 1] {
                return Err(Error::NonMonotone {
                    location: locs[i],
                    previous: vals[i - 1],
                    value: vals[i],
                });
            }
        }
        Ok(Self { locs, vals })
    }

    /// Builds a step function from point masses; masses at equal locations
    /// are summed.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        for &(h, m) in &atoms {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidStepFunction(format!(
                    "atom location {h} is not a positive finite number"
                )));
            }
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::InvalidStepFunction(format!(
                    "atom mass {m} at h = {h} is not a nonnegative finite number"
                )));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut locs = Vec::with_capacity(atoms.len());
        let mut vals = Vec::with_capacity(atoms.len());
        let mut acc = CompensatedSum::new();
        for (h, m) in atoms {
            acc.add(m);
            if locs.last() == Some(&h) {
                *vals.last_mut().unwrap() = acc.value();
            } else {
                locs.push(h);
                vals.push(acc.value());
            }
        }
        Ok(Self { locs, vals })
    }

    /// Internal constructor for values already known to be valid.
    pub(crate) fn from_sorted_unchecked(locs: Vec<f64>, vals: Vec<f64>) -> Self {
        debug_assert_eq!(locs.len(), vals.len());
        debug_assert!(locs.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        Self { locs, vals }
    }

    pub fn locations(&self) -> &[f64] {
        &self.locs
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn len(&self) -> usize {
        self.locs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locs.is_empty()
    }

    /// `(location, cumulative value)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.locs.iter().copied().zip(self.vals.iter().copied())
    }

    /// `(location, jump size)` pairs.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.locs
            .iter()
            .zip(&self.vals)
            .scan(0.0, |prev, (&h, &v)| {
                let dv = v - *prev;
                *prev = v;
                Some((h, dv))
            })
    }

    pub fn jump_sizes(&self) -> Vec<f64> {
        self.jumps().map(|(_, dv)| dv).collect()
    }

    /// Value to the right of the last jump (0 for the zero function).
    pub fn terminal(&self) -> f64 {
        self.vals.last().copied().unwrap_or(0.0)
    }

    /// Number of jump locations `<= z`.
    fn rank(&self, z: f64) -> usize {
        self.locs.partition_point(|&h| h <= z)
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self.rank(z) {
            0 => 0.0,
            k => self.vals[k - 1],
        }
    }

    /// Left limit `f(z-)`.
    pub fn eval_left(&self, z: f64) -> f64 {
        match self.locs.partition_point(|&h| h < z) {
            0 => 0.0,
            k => self.vals[k - 1],
        }
    }

    /// `int_0^z f(t) dt`, exact.
    pub fn integral(&self, z: f64) -> f64 {
        let k = self.rank(z);
        let mut acc = CompensatedSum::new();
        for i in 0..k {
            let right = if i + 1 < k { self.locs[i + 1] } else { z };
            acc.add(self.vals[i] * (right - self.locs[i]));
        }
        acc.value()
    }

    /// `int_0^{h_i} f(t) dt` at every jump location.
    pub fn integrals_at_jumps(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        let mut acc = CompensatedSum::new();
        for i in 0..self.len() {
            if i > 0 {
                acc.add(self.vals[i - 1] * (self.locs[i] - self.locs[i - 1]));
            }
            out.push(acc.value());
        }
        out
    }

    /// `sum_{h_j <= z} kernel(h_j) * Δf(h_j)`.
    pub fn weighted_stieltjes(&self, z: f64, kernel: impl Fn(f64) -> f64) -> f64 {
        let k = self.rank(z);
        self.jumps()
            .take(k)
            .map(|(h, dv)| kernel(h) * dv)
            .collect::<CompensatedSum>()
            .value()
    }

    /// `int_z^inf exp(-c int_0^u f(t) dt) du`, in closed form.
    ///
    /// Between jumps the inner integral is linear in `u`, so every segment
    /// contributes an exact exponential integral; the last segment has an
    /// analytic tail, which diverges when the terminal value is zero.
    pub fn exp_tail(&self, z: f64, c: f64) -> ExtReal {
        assert!(c > 0.0, "exp_tail needs a positive rate");
        if self.terminal() <= 0.0 {
            return ExtReal::Infinite;
        }
        let z = z.max(0.0);
        let k = self.rank(z);

        // Exponent -c * I(u) tracked in log space from u = z onward.
        let mut log_w = -c * self.integral(z);
        let mut acc = CompensatedSum::new();
        let mut left = z;
        let mut slope = if k == 0 { 0.0 } else { self.vals[k - 1] };
        for i in k..self.len() {
            let right = self.locs[i];
            let len = right - left;
            acc.add(segment(log_w, c * slope, len));
            log_w -= c * slope * len;
            left = right;
            slope = self.vals[i];
        }
        acc.add((log_w).exp() / (c * slope));
        ExtReal::Finite(acc.value())
    }

    /// `int_0^z exp(-c int_0^u f(t) dt) du`, in closed form.
    pub fn exp_head(&self, z: f64, c: f64) -> f64 {
        assert!(c > 0.0, "exp_head needs a positive rate");
        let mut acc = CompensatedSum::new();
        let (mut left, mut log_w, mut slope) = (0.0, 0.0, 0.0);
        for (&h, &v) in self.locs.iter().zip(&self.vals) {
            if h >= z {
                break;
            }
            let len = h - left;
            acc.add(segment(log_w, c * slope, len));
            log_w -= c * slope * len;
            left = h;
            slope = v;
        }
        acc.add(segment(log_w, c * slope, z - left));
        acc.value()
    }

    /// [`exp_tail`](Self::exp_tail) at every jump location, accumulated
    /// backwards in one pass; `None` when the tails diverge.
    pub fn exp_tails_at_jumps(&self, c: f64) -> Option<Vec<f64>> {
        assert!(c > 0.0, "exp_tails_at_jumps needs a positive rate");
        let k = self.len();
        if self.terminal() <= 0.0 {
            return None;
        }
        let ints = self.integrals_at_jumps();
        let mut tails = vec![0.0; k];
        tails[k - 1] = (-c * ints[k - 1]).exp() / (c * self.vals[k - 1]);
        for i in (0..k - 1).rev() {
            let len = self.locs[i + 1] - self.locs[i];
            tails[i] = tails[i + 1] + segment(-c * ints[i], c * self.vals[i], len);
        }
        Some(tails)
    }

    /// Multiplies every value by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor >= 0.0 && factor.is_finite());
        if factor == 0.0 {
            return Self::zero();
        }
        Self {
            locs: self.locs.clone(),
            vals: self.vals.iter().map(|v| v * factor).collect(),
        }
    }

    /// Largest absolute difference between the two functions, attained at
    /// one of the jump locations of either.
    pub fn sup_distance(&self, other: &StepCdf) -> f64 {
        self.locs
            .iter()
            .chain(&other.locs)
            .map(|&z| (self.eval(z) - other.eval(z)).abs())
            .fold(0.0, f64::max)
    }
}

/// `int_0^len exp(log_w - rate * s) ds` for `rate >= 0`.
fn segment(log_w: f64, rate: f64, len: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    if rate == 0.0 {
        return log_w.exp() * len;
    }
    log_w.exp() * -(-rate * len).exp_m1() / rate
}
