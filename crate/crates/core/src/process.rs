//! Weighted Poisson generator sets.
//!
//! The driving process has intensity `Lebesgue x dF` on `R^d x (0, inf)`.
//! For a model of finite mass this is an independently marked homogeneous
//! Poisson process: rate `F(inf)` per unit volume, marks drawn from
//! `F / F(inf)`. Sampling covers the observation window dilated by a guard
//! margin so that cells of generators inside the window are (with high
//! probability) the same as in the infinite process.
//!
//! Randomness comes from ChaCha8 seeded through [`child_seed`], a SplitMix64
//! mix of a root seed, a replication index and a purpose tag, so parallel
//! replications are reproducible regardless of scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geometry::{Rect, WeightedPoint};
use crate::numeric::{integrate, integrate_pieces, unit_ball_volume, CompensatedSum};
use crate::stepfn::StepCdf;

const QUAD_TOL: f64 = 1e-12;

/// A weight distribution function with finite total mass.
#[derive(Debug, Clone, PartialEq)]
pub enum CdfModel {
    Step(StepCdf),
    /// `F(z) = min(z, m)`: Lebesgue measure on `(0, m)`.
    UniformIdentity { m: f64 },
    Scaled { base: Box<CdfModel>, factor: f64 },
}

impl CdfModel {
    /// `min(z, m)`.
    pub fn f1(m: f64) -> Self {
        CdfModel::UniformIdentity { m }
    }

    /// Atoms 0.01, 0.04 and 0.95 at weights 1, 8 and 10.
    pub fn f2() -> Self {
        CdfModel::Step(StepCdf::from_atoms([(1.0, 0.01), (8.0, 0.04), (10.0, 0.95)]).unwrap())
    }

    pub fn scaled(self, factor: f64) -> Self {
        CdfModel::Scaled {
            base: Box::new(self),
            factor,
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self {
            CdfModel::Step(f) => f.eval(z),
            CdfModel::UniformIdentity { m } => z.clamp(0.0, *m),
            CdfModel::Scaled { base, factor } => factor * base.eval(z),
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            CdfModel::Step(f) => f.terminal(),
            CdfModel::UniformIdentity { m } => *m,
            CdfModel::Scaled { base, factor } => factor * base.total_mass(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CdfModel::UniformIdentity { m } if !(m.is_finite() && *m > 0.0) => Err(Error::InvalidMass),
            CdfModel::Scaled { factor, .. } if !(factor.is_finite() && *factor > 0.0) => Err(Error::InvalidMass),
            CdfModel::Scaled { base, .. } => base.validate(),
            _ => {
                let mass = self.total_mass();
                if mass.is_finite() && mass > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidMass)
                }
            }
        }
    }

    /// Generalised inverse: the smallest `z` with `eval(z) >= u`, for
    /// `u` in `(0, total_mass]`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            CdfModel::Step(f) => {
                let i = f.values().partition_point(|&v| v < u).min(f.len().saturating_sub(1));
                f.locations()[i]
            }
            CdfModel::UniformIdentity { m } => u.clamp(0.0, *m),
            CdfModel::Scaled { base, factor } => base.quantile(u / factor),
        }
    }

    /// Smallest and largest point of the support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            CdfModel::Step(f) => {
                let pos: Vec<f64> = f.jumps().filter(|j| j.1 > 0.0).map(|j| j.0).collect();
                (pos.first().copied().unwrap_or(0.0), pos.last().copied().unwrap_or(0.0))
            }
            CdfModel::UniformIdentity { m } => (0.0, *m),
            CdfModel::Scaled { base, .. } => base.support(),
        }
    }

    /// `int (z - h)_+^p dF(h)` for `p > 0`.
    pub fn power_moment(&self, p: f64, z: f64) -> f64 {
        match self {
            CdfModel::Step(f) => f.weighted_stieltjes(z, |h| (z - h).max(0.0).powf(p)),
            CdfModel::UniformIdentity { m } => {
                if z <= 0.0 {
                    return 0.0;
                }
                let top = z.min(*m);
                (z.powf(p + 1.0) - (z - top).powf(p + 1.0)) / (p + 1.0)
            }
            CdfModel::Scaled { base, factor } => factor * base.power_moment(p, z),
        }
    }

    /// `int g dF` over the whole support.
    pub fn measure_integral(&self, g: impl Fn(f64) -> f64) -> f64 {
        match self {
            CdfModel::Step(f) => f.weighted_stieltjes(f64::INFINITY, g),
            CdfModel::UniformIdentity { m } => integrate(g, 0.0, *m, QUAD_TOL),
            CdfModel::Scaled { base, factor } => factor * base.measure_integral(g),
        }
    }

    /// Per-volume intensity of generators lying in their own cell in
    /// dimension `d`: `int exp(-kappa_d int (h - t)^{d/2} dF(t)) dF(h)`.
    pub fn thinned_mass(&self, d: usize) -> f64 {
        let kappa = unit_ball_volume(d);
        let p = d as f64 / 2.0;
        self.measure_integral(|h| (-kappa * self.power_moment(p, h)).exp())
    }

    /// Step approximation with `k` equal mass levels, used by oracles and
    /// plots for the continuous model.
    pub fn discretize(&self, k: usize) -> StepCdf {
        match self {
            CdfModel::Step(f) => f.clone(),
            _ => {
                let (_, hi) = self.support();
                StepCdf::new((1..=k).map(|i| {
                    let z = hi * i as f64 / k as f64;
                    (z, self.eval(z))
                }))
                .expect("model evaluations are monotone")
            }
        }
    }
}

/// Axis-aligned box in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::invalid("window corners have different dimensions"));
        }
        if !lo.iter().zip(&hi).all(|(a, b)| a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::invalid(format!("degenerate window {lo:?} .. {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    /// Cube of the given volume centred at the origin.
    pub fn centered_cube(d: usize, volume: f64) -> Result<Self> {
        let r = volume.powf(1.0 / d as f64) / 2.0;
        Self::new(vec![-r; d], vec![r; d])
    }

    pub fn from_rect(r: &Rect) -> Self {
        Self {
            lo: r.min.to_vec(),
            hi: r.max.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn dilate(&self, by: f64) -> Self {
        Self {
            lo: self.lo.iter().map(|v| v - by).collect(),
            hi: self.hi.iter().map(|v| v + by).collect(),
        }
    }

    pub fn erode(&self, by: f64) -> Option<Self> {
        Self::new(
            self.lo.iter().map(|v| v + by).collect(),
            self.hi.iter().map(|v| v - by).collect(),
        )
        .ok()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| v >= a && v <= b)
    }

    pub fn rect(&self) -> Result<Rect> {
        if self.dim() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                found: self.dim(),
            });
        }
        Rect::new(self.lo[0], self.lo[1], self.hi[0], self.hi[1])
    }

    /// Flat `[lo..., hi...]` form used in the JSON format.
    pub fn to_flat(&self) -> Vec<f64> {
        self.lo.iter().chain(&self.hi).copied().collect()
    }

    pub fn from_flat(v: &[f64]) -> Result<Self> {
        if !v.len().is_multiple_of(2) || v.is_empty() {
            return Err(Error::invalid("window needs an even number of coordinates"));
        }
        let d = v.len() / 2;
        Self::new(v[..d].to_vec(), v[d..].to_vec())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    pub d: usize,
    pub window: Window,
    pub guard: f64,
    pub points: Vec<WeightedPoint>,
}

impl GeneratorSet {
    /// The window dilated by the guard margin.
    pub fn region(&self) -> Window {
        self.window.dilate(self.guard)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window.dim() != self.d {
            return Err(Error::Dimension {
                expected: self.d,
                found: self.window.dim(),
            });
        }
        if !(self.guard >= 0.0 && self.guard.is_finite()) {
            return Err(Error::invalid(format!("guard {} must be nonnegative", self.guard)));
        }
        let region = self.region();
        for (i, p) in self.points.iter().enumerate() {
            if p.x.len() != self.d {
                return Err(Error::Dimension {
                    expected: self.d,
                    found: p.x.len(),
                });
            }
            if !(p.h.is_finite() && p.h >= 0.0) {
                return Err(Error::invalid(format!("generator {i} has weight {}", p.h)));
            }
            if !region.contains(&p.x) {
                return Err(Error::invalid(format!("generator {i} lies outside the simulation region")));
            }
        }
        Ok(())
    }
}

/// Purpose tags for [`child_seed`].
pub mod purpose {
    pub const SAMPLE: u64 = 1;
    pub const SECTION: u64 = 2;
    pub const PROBE: u64 = 3;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replication `rep` and stream `purpose` under `root`.
pub fn child_seed(root: u64, rep: u64, purpose: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(root) ^ rep) ^ purpose.rotate_left(32))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn poisson_count(rng: &mut impl Rng, mean: f64) -> Result<usize> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::invalid(format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as usize)
}

fn uniform_in(rng: &mut impl Rng, w: &Window) -> Vec<f64> {
    w.lo.iter().zip(&w.hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect()
}

fn draw_weight(rng: &mut impl Rng, model: &CdfModel, mass: f64) -> f64 {
    // 1 - U lies in (0, 1], so the quantile argument is never 0
    model.quantile((1.0 - rng.random::<f64>()) * mass)
}

/// Poisson generator set on `window` dilated by `guard`.
pub fn sample(model: &CdfModel, window: &Window, guard: f64, seed: u64) -> Result<GeneratorSet> {
    model.validate()?;
    if !(guard >= 0.0 && guard.is_finite()) {
        return Err(Error::invalid(format!("guard {guard} must be nonnegative")));
    }
    let region = window.dilate(guard);
    let mass = model.total_mass();
    let mut rng = rng_from_seed(seed);
    let n = poisson_count(&mut rng, mass * region.volume())?;
    let points = (0..n)
        .map(|_| {
            let x = uniform_in(&mut rng, &region);
            WeightedPoint::new(x, draw_weight(&mut rng, model, mass))
        })
        .collect();
    Ok(GeneratorSet {
        d: window.dim(),
        window: window.clone(),
        guard,
        points,
    })
}

/// `sqrt(h_max - h_min) + 5 / sqrt(mass)`.
pub fn default_guard(model: &CdfModel) -> f64 {
    let (lo, hi) = model.support();
    guard_formula(lo, hi, model.total_mass())
}

fn guard_formula(lo: f64, hi: f64, mass: f64) -> f64 {
    (hi - lo).max(0.0).sqrt() + 5.0 / mass.sqrt()
}

/// Square window, centred at the origin, in which `target` generators are
/// expected to lie in their own cells.
pub fn window_for_target_count(model: &CdfModel, d: usize, target: f64) -> Result<Window> {
    model.validate()?;
    let g = model.thinned_mass(d);
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::invalid("model has no own-cell generators"));
    }
    Window::centered_cube(d, target / g)
}

/// The planar weight distribution seen on a section through a 3D process
/// with weight distribution `h`: `F(z) = 2 int sqrt(z - t) dH(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionModel {
    pub h: CdfModel,
}

impl SectionModel {
    pub fn new(h: CdfModel) -> Result<Self> {
        h.validate()?;
        Ok(Self { h })
    }

    pub fn planar_cdf(&self, z: f64) -> f64 {
        2.0 * self.h.power_moment(0.5, z)
    }

    /// `int_0^z F(t) dt`.
    pub fn planar_cdf_integral(&self, z: f64) -> f64 {
        4.0 / 3.0 * self.h.power_moment(1.5, z)
    }

    /// Probability that a planar generator of weight `z` lies in its own cell.
    pub fn own_cell_probability(&self, z: f64) -> f64 {
        (-std::f64::consts::PI * self.planar_cdf_integral(z)).exp()
    }

    /// Planar own-cell intensity per unit area:
    /// `int dH(t) int_R exp(-pi Phi(t + s^2)) ds`.
    pub fn planar_thinned_mass(&self) -> f64 {
        let breaks: Vec<f64> = match &self.h {
            CdfModel::Step(f) => f.locations().to_vec(),
            CdfModel::Scaled { base, .. } => match base.as_ref() {
                CdfModel::Step(f) => f.locations().to_vec(),
                _ => Vec::new(),
            },
            _ => Vec::new(),
        };
        self.h.measure_integral(|t| {
            let end = self.tail_end(t);
            let kinks: Vec<f64> = breaks.iter().filter(|&&b| b > t).map(|b| (b - t).sqrt()).collect();
            2.0 * integrate_pieces(|s| self.own_cell_probability(t + s * s), 0.0, end, &kinks, QUAD_TOL)
        })
    }

    /// An `s` beyond which `exp(-pi Phi(t + s^2))` is negligible.
    fn tail_end(&self, t: f64) -> f64 {
        let mut s = 1.0;
        while self.own_cell_probability(t + s * s) > 1e-18 && s < 1e6 {
            s *= 2.0;
        }
        s
    }

    /// Weight above which a planar generator is in its own cell with
    /// probability at most 1e-3, and never below the support of `H`.
    pub fn default_hmax(&self) -> f64 {
        let target = (1e3f64).ln() / std::f64::consts::PI;
        let (_, hi) = self.h.support();
        let mut lo = 0.0;
        let mut up = hi.max(1.0);
        while self.planar_cdf_integral(up) < target {
            lo = up;
            up *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + up);
            if self.planar_cdf_integral(mid) < target {
                lo = mid;
            } else {
                up = mid;
            }
        }
        up.max(hi)
    }

    /// Guard for the planar process truncated at `h_max`.
    pub fn default_guard(&self, h_max: f64) -> f64 {
        let (lo, _) = self.h.support();
        guard_formula(lo, h_max, self.planar_cdf(h_max))
    }

    /// Planar window for an expected `target` own-cell generators.
    pub fn window_for_target_count(&self, target: f64) -> Result<Window> {
        let g = self.planar_thinned_mass();
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::invalid("section model has no own-cell generators"));
        }
        Window::centered_cube(2, target / g)
    }
}

/// Samples a 3D slab of half-thickness `sqrt(h_max)` over the dilated planar
/// window and maps each generator `(x, h)` to `((x1, x2), h + x3^2)`,
/// keeping those with mapped weight at most `h_max`.
///
/// Dropping the heavier points cannot change the own-cell status of the kept
/// ones: a generator can only be dominated by lighter generators.
pub fn section_sample(model_h: &CdfModel, window: &Window, guard: f64, h_max: f64, seed: u64) -> Result<GeneratorSet> {
    model_h.validate()?;
    if window.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: window.dim(),
        });
    }
    let (_, hi) = model_h.support();
    if !(h_max.is_finite() && h_max >= hi) {
        return Err(Error::invalid(format!(
            "h_max = {h_max} lies below the support of H (which extends to {hi})"
        )));
    }
    let region = window.dilate(guard);
    let half = h_max.sqrt();
    let slab = Window::new(
        vec![region.lo[0], region.lo[1], -half],
        vec![region.hi[0], region.hi[1], half],
    )?;
    let mass = model_h.total_mass();
    let mut rng = rng_from_seed(seed);
    let n = poisson_count(&mut rng, mass * slab.volume())?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let x = uniform_in(&mut rng, &slab);
        let h = draw_weight(&mut rng, model_h, mass);
        let p = section_map(&x, h);
        if p.h <= h_max {
            points.push(p);
        }
    }
    Ok(GeneratorSet {
        d: 2,
        window: window.clone(),
        guard,
        points,
    })
}

/// `(x, h) -> ((x_1, .., x_{d-1}), h + x_d^2)`.
pub fn section_map(x: &[f64], h: f64) -> WeightedPoint {
    let (last, head) = x.split_last().expect("section map needs d >= 1");
    WeightedPoint::new(head.to_vec(), h + last * last)
}

/// Counts points with weight at most `z` inside `w` (a test helper that is
/// also handy in examples).
pub fn count_in(gens: &GeneratorSet, w: &Window, z: f64) -> usize {
    gens.points.iter().filter(|p| p.h <= z && w.contains(&p.x)).count()
}

/// Mean and variance of a sample.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().copied().collect::<CompensatedSum>().value() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn f2_thinned_mass_closed_form() {
        let g = CdfModel::f2().thinned_mass(2);
        let closed = 0.01 + 0.04 * (-0.07 * PI).exp() + 0.95 * (-0.17 * PI).exp();
        assert_relative_eq!(g, closed, epsilon = 1e-14);
        assert_relative_eq!(g, 0.599_007, epsilon = 5e-7);
        let w = window_for_target_count(&CdfModel::f2(), 2, 1000.0).unwrap();
        assert_relative_eq!(w.volume(), 1669.43, epsilon = 0.01);
    }

    #[test]
    fn point_mass_window() {
        let m = CdfModel::Step(StepCdf::from_atoms([(3.0, 2.5)]).unwrap());
        let w = window_for_target_count(&m, 2, 100.0).unwrap();
        assert_relative_eq!(w.volume(), 40.0, epsilon = 1e-12);
    }

    #[test]
    fn uniform_thinned_mass() {
        // int_0^1 exp(-pi h^2 / 2) dh, via the error function identity
        let g = CdfModel::f1(1.0).thinned_mass(2);
        let mut acc = 0.0;
        let n = 200_000;
        for i in 0..n {
            let h = (i as f64 + 0.5) / n as f64;
            acc += (-PI * h * h / 2.0).exp() / n as f64;
        }
        assert_relative_eq!(g, acc, epsilon = 1e-9);
    }

    #[test]
    fn guard_examples() {
        assert_relative_eq!(default_guard(&CdfModel::f2()), 8.0, epsilon = 1e-12);
        assert_relative_eq!(default_guard(&CdfModel::f1(1.0)), 6.0, epsilon = 1e-12);
        let point = CdfModel::Step(StepCdf::from_atoms([(2.0, 4.0)]).unwrap());
        assert_relative_eq!(default_guard(&point), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn quantile_is_generalised_inverse() {
        let models = [CdfModel::f2(), CdfModel::f1(1.3), CdfModel::f2().scaled(3.0)];
        for m in &models {
            let mass = m.total_mass();
            for i in 1..=1000 {
                let u = mass * i as f64 / 1000.0;
                let q = m.quantile(u);
                assert!(m.eval(q) >= u * (1.0 - 1e-12), "{m:?} at {u}");
            }
        }
        assert_eq!(CdfModel::f2().quantile(0.01), 1.0);
        assert_eq!(CdfModel::f2().quantile(0.0100001), 8.0);
        assert_eq!(CdfModel::f2().quantile(1.0), 10.0);
    }

    #[test]
    fn power_moments_match_quadrature() {
        let m = CdfModel::f1(1.5);
        for &(p, z) in &[(0.5, 0.7), (1.0, 2.0), (1.5, 1.2)] {
            let q = integrate(|h| (z - h).max(0.0).powf(p), 0.0, 1.5f64.min(z), 1e-13);
            assert_relative_eq!(m.power_moment(p, z), q, epsilon = 1e-10);
        }
    }

    #[test]
    fn uniform_support_and_determinism() {
        let w = Window::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let m = CdfModel::f1(1.0);
        let a = sample(&m, &w, 0.0, 99).unwrap();
        let b = sample(&m, &w, 0.0, 99).unwrap();
        assert_eq!(a, b);
        assert!(a.points.iter().all(|p| p.h > 0.0 && p.h <= 1.0 && w.contains(&p.x)));
        let c = sample(&m, &w, 0.0, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_models() {
        let w = Window::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(sample(&CdfModel::Step(StepCdf::zero()), &w, 0.0, 1).is_err());
        assert!(sample(&CdfModel::f1(f64::INFINITY), &w, 0.0, 1).is_err());
        assert!(sample(&CdfModel::f1(1.0), &w, -1.0, 1).is_err());
    }

    #[test]
    fn poisson_mean_count() {
        let m = CdfModel::Step(StepCdf::from_atoms([(1.0, 0.5990)]).unwrap());
        let w = Window::new(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap();
        let counts: Vec<f64> = (0..2000)
            .map(|r| sample(&m, &w, 0.0, child_seed(5, r, purpose::SAMPLE)).unwrap().points.len() as f64)
            .collect();
        let (mean, var) = mean_var(&counts);
        let se = (var / counts.len() as f64).sqrt();
        assert!((mean - 59.90).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn disjoint_counts_are_poisson_and_uncorrelated() {
        let m = CdfModel::f1(1.0);
        let w = Window::new(vec![0.0, 0.0], vec![4.0, 2.0]).unwrap();
        let left = Window::new(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap();
        let right = Window::new(vec![2.0, 0.0], vec![4.0, 2.0]).unwrap();
        let reps = 1000;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for r in 0..reps {
            let g = sample(&m, &w, 0.0, child_seed(8, r, purpose::SAMPLE)).unwrap();
            a.push(count_in(&g, &left, f64::INFINITY) as f64);
            b.push(count_in(&g, &right, f64::INFINITY) as f64);
        }
        let (ma, va) = mean_var(&a);
        let (mb, vb) = mean_var(&b);
        // mean 4 each; chi-square dispersion index within its 1% band
        for (m_, v_) in [(ma, va), (mb, vb)] {
            assert!((m_ - 4.0).abs() < 4.0 * (4.0f64 / reps as f64).sqrt());
            let dispersion = v_ * (reps as f64 - 1.0) / m_;
            let sd = (2.0 * (reps as f64 - 1.0)).sqrt();
            assert!((dispersion - (reps as f64 - 1.0)).abs() < 2.576 * sd);
        }
        let cov = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (reps as f64 - 1.0);
        let corr = cov / (va * vb).sqrt();
        assert!(corr.abs() < 2.576 / (reps as f64).sqrt());
    }

    #[test]
    fn section_map_adds_squared_depth() {
        let p = section_map(&[1.0, 2.0, -0.5], 3.0);
        assert_eq!(p.x, vec![1.0, 2.0]);
        assert_eq!(p.h, 3.25);
        let h0 = 0.4;
        let m = CdfModel::Step(StepCdf::from_atoms([(h0, 1.0)]).unwrap());
        let w = Window::new(vec![0.0, 0.0], vec![5.0, 5.0]).unwrap();
        let g = section_sample(&m, &w, 1.0, 2.0, 3).unwrap();
        assert!(!g.points.is_empty());
        assert!(g.points.iter().all(|p| p.h >= h0 && p.h <= 2.0));
        assert_eq!(g, section_sample(&m, &w, 1.0, 2.0, 3).unwrap());
        assert!(section_sample(&m, &w, 1.0, 0.1, 3).is_err());
    }

    #[test]
    fn section_intensity_matches_abel_relation() {
        let m = CdfModel::f1(1.0);
        let sec = SectionModel::new(m.clone()).unwrap();
        let w = Window::new(vec![0.0, 0.0], vec![3.0, 3.0]).unwrap();
        let z = 1.2;
        let counts: Vec<f64> = (0..500)
            .map(|r| {
                let g = section_sample(&m, &w, 0.0, 2.0, child_seed(13, r, purpose::SECTION)).unwrap();
                count_in(&g, &w, z) as f64
            })
            .collect();
        let (mean, var) = mean_var(&counts);
        let expected = 9.0 * sec.planar_cdf(z);
        let se = (var / counts.len() as f64).sqrt();
        assert!((mean - expected).abs() < 4.0 * se, "{mean} vs {expected} (se {se})");
    }

    #[test]
    fn section_defaults_for_uniform_h() {
        let sec = SectionModel::new(CdfModel::f1(1.0)).unwrap();
        let h_max = sec.default_hmax();
        assert!(h_max > 1.0 && h_max < 3.0);
        assert_relative_eq!(sec.own_cell_probability(h_max), 1e-3, epsilon = 1e-9);
        // planar F(z) for uniform H on (0, 1): (4/3)(z^1.5 - (z - 1)^1.5)
        let z: f64 = 1.9;
        assert_relative_eq!(sec.planar_cdf(z), 4.0 / 3.0 * (z.powf(1.5) - (z - 1.0).powf(1.5)), epsilon = 1e-12);
        let g = sec.planar_thinned_mass();
        assert!(g > 0.0 && g < 2.0);
    }

    #[test]
    fn seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for r in 0..1000 {
            for p in 1..4 {
                assert!(seen.insert(child_seed(42, r, p)));
            }
        }
    }

    #[test]
    fn window_flat_round_trip() {
        let w = Window::new(vec![-1.0, 2.0, 0.5], vec![3.0, 4.0, 1.5]).unwrap();
        assert_eq!(Window::from_flat(&w.to_flat()).unwrap(), w);
        assert_relative_eq!(w.volume(), 8.0);
        assert!(Window::from_flat(&[0.0, 1.0, 2.0]).is_err());
    }
}
