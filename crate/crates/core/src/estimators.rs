//! Forward transforms of the weight distribution `F` and the two inverse
//! estimators built on them.
//!
//! * `G_F` is the intensity of generators lying in their own cell. Its
//!   empirical version counts such generators per unit area, and the step
//!   recursion [`invert_g`] undoes the damping to give the first estimator.
//! * `F^V` is the volume-biased weight distribution of the cells. In the
//!   plane it is an explicit functional of `F` and `m_F`; [`invert_v`]
//!   solves it back for `F` given an estimate of `F^V` and of `m_F`.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{own_cell_flags, tessellate, Tessellation};
use crate::numeric::{integrate, integrate_tail, unit_ball_volume, unit_sphere_area, CompensatedSum, ExtReal};
use crate::process::{GeneratorSet, Window};
use crate::stepfn::StepCdf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionParams {
    pub d: usize,
    /// Volume of the unit ball.
    pub kappa: f64,
    /// Surface measure of the unit sphere.
    pub omega: f64,
}

impl DimensionParams {
    pub fn new(d: usize) -> Self {
        assert!(d >= 1, "dimension must be positive");
        Self {
            d,
            kappa: unit_ball_volume(d),
            omega: unit_sphere_area(d),
        }
    }

    pub fn planar() -> Self {
        Self::new(2)
    }

    fn half_d(&self) -> f64 {
        self.d as f64 / 2.0
    }

    fn kernel(&self, s: f64) -> f64 {
        match self.d {
            2 => s,
            _ => s.powf(self.half_d()),
        }
    }
}

/// `sum_{j<i} (h_i - h_j)^{d/2} ΔF_j` for every jump `i`.
fn damping_exponents(f: &StepCdf, dim: &DimensionParams) -> Vec<f64> {
    let locs = f.locations();
    let dv = f.jump_sizes();
    (0..f.len())
        .map(|i| {
            (0..i)
                .map(|j| dim.kernel(locs[i] - locs[j]) * dv[j])
                .collect::<CompensatedSum>()
                .value()
        })
        .collect()
}

fn cumulative(locs: Vec<f64>, increments: impl IntoIterator<Item = f64>) -> StepCdf {
    let mut acc = CompensatedSum::new();
    let mut prev: f64 = 0.0;
    let vals = increments
        .into_iter()
        .map(|dv| {
            acc.add(dv);
            prev = prev.max(acc.value());
            prev
        })
        .collect();
    StepCdf::from_sorted_unchecked(locs, vals)
}

/// `G_F(z) = sum_{h_i <= z} ΔF_i exp(-kappa_d sum_{j<i} (h_i - h_j)^{d/2} ΔF_j)`.
pub fn forward_g(f: &StepCdf, dim: &DimensionParams) -> StepCdf {
    let s = damping_exponents(f, dim);
    let incs: Vec<f64> = f
        .jump_sizes()
        .iter()
        .zip(&s)
        .map(|(dv, s)| dv * (-dim.kappa * s).exp())
        .collect();
    cumulative(f.locations().to_vec(), incs)
}

/// Per-area intensity of the thinning at offset `y` (given as `|y|^2`) of
/// generators with weight at most `z`.
pub fn intensity_thinned(f: &StepCdf, dim: &DimensionParams, y_norm2: f64, z: f64) -> f64 {
    f.weighted_stieltjes(z, |h| {
        let reach = y_norm2 + h;
        let s = f.weighted_stieltjes(reach, |t| dim.kernel(reach - t));
        (-dim.kappa * s).exp()
    })
}

/// Recursive inverse of [`forward_g`]: the unique step function whose
/// transform is `g`.
pub fn invert_g(g: &StepCdf, dim: &DimensionParams) -> Result<StepCdf> {
    let locs = g.locations();
    let dg = g.jump_sizes();
    let mut df: Vec<f64> = Vec::with_capacity(g.len());
    for i in 0..g.len() {
        let s: f64 = (0..i)
            .map(|j| dim.kernel(locs[i] - locs[j]) * df[j])
            .collect::<CompensatedSum>()
            .value();
        let inc = dg[i] * (dim.kappa * s).exp();
        if !inc.is_finite() {
            return Err(Error::Overflow("the inverse of G"));
        }
        df.push(inc);
    }
    let f = cumulative(locs.to_vec(), df);
    if !f.terminal().is_finite() {
        return Err(Error::Overflow("the inverse of G"));
    }
    Ok(f)
}

/// How far to shrink the simulation region to get the counting window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Erosion {
    /// Shrink by the guard, i.e. count exactly in the observation window.
    Auto,
    Margin(f64),
}

/// Everything the estimators read from one observed realisation.
#[derive(Debug, Clone)]
pub struct EmpiricalInputs {
    pub gens: GeneratorSet,
    pub own_cell: Vec<bool>,
    pub tessellation: Option<Tessellation>,
    pub count_window: Window,
}

impl EmpiricalInputs {
    /// Own-cell flags only, enough for the first estimator.
    pub fn new(gens: GeneratorSet, erosion: Erosion) -> Result<Self> {
        gens.validate()?;
        let margin = match erosion {
            Erosion::Auto => gens.guard,
            Erosion::Margin(m) if m >= gens.guard && m.is_finite() => m,
            Erosion::Margin(m) => {
                return Err(Error::invalid(format!(
                    "erosion {m} is smaller than the guard {}; counts would include unguarded points",
                    gens.guard
                )))
            }
        };
        let count_window = if margin == gens.guard {
            gens.window.clone()
        } else {
            gens.region()
                .erode(margin)
                .ok_or_else(|| Error::invalid(format!("erosion {margin} leaves an empty window")))?
        };
        let own_cell = if gens.d == 2 {
            own_cell_flags(&gens.points)?
        } else {
            (0..gens.points.len())
                .map(|i| crate::geometry::contains_own_generator(i, &gens.points))
                .collect()
        };
        Ok(Self {
            gens,
            own_cell,
            tessellation: None,
            count_window,
        })
    }

    /// Adds the planar tessellation clipped to the simulation region.
    pub fn with_tessellation(mut self) -> Result<Self> {
        let clip = self.gens.region().rect()?;
        self.tessellation = Some(tessellate(&self.gens.points, &clip)?);
        Ok(self)
    }

    fn counted(&self, i: usize) -> bool {
        self.count_window.contains(&self.gens.points[i].x)
    }

    /// Number of own-cell generators in the counting window.
    pub fn own_cell_count(&self) -> usize {
        (0..self.gens.points.len()).filter(|&i| self.own_cell[i] && self.counted(i)).count()
    }
}

/// Own-cell generators in the counting window with weight at most `z`,
/// per unit volume, as a step function of `z`.
pub fn empirical_g(inp: &EmpiricalInputs) -> Result<StepCdf> {
    let unit = 1.0 / inp.count_window.volume();
    StepCdf::from_atoms(
        inp.gens
            .points
            .iter()
            .enumerate()
            .filter(|&(i, _)| inp.own_cell[i] && inp.counted(i))
            .map(|(_, p)| (p.h, unit)),
    )
}

/// Volume-weighted weight distribution: `(tilde, hat)` normalised by the
/// window area and by the total observed cell area respectively. Cells that
/// touch the clip boundary are left out.
pub fn empirical_fv(inp: &EmpiricalInputs) -> Result<(StepCdf, StepCdf)> {
    if inp.gens.d != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: inp.gens.d,
        });
    }
    let tess = inp
        .tessellation
        .as_ref()
        .ok_or_else(|| Error::invalid("volume-weighted estimator needs the tessellation"))?;
    let mut atoms: Vec<(f64, f64)> = tess
        .cells
        .iter()
        .filter(|c| !c.is_empty && !c.touches_clip_boundary && inp.counted(c.index))
        .map(|c| (inp.gens.points[c.index].h, c.area))
        .collect();
    if atoms.is_empty() {
        return Err(Error::NoQualifyingCells);
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut locs: Vec<f64> = Vec::new();
    let mut cum: Vec<f64> = Vec::new();
    let mut running = 0.0;
    for (h, a) in atoms {
        running += a;
        if locs.last() == Some(&h) {
            *cum.last_mut().unwrap() = running;
        } else {
            locs.push(h);
            cum.push(running);
        }
    }
    let (area, total) = (inp.count_window.volume(), running);
    let tilde = StepCdf::new(locs.iter().copied().zip(cum.iter().map(|c| c / area)))?;
    // x / x == 1 exactly, so the terminal value of `hat` is exactly one
    let hat = StepCdf::new(locs.into_iter().zip(cum.into_iter().map(|c| c / total)))?;
    Ok((tilde, hat))
}

/// `m_F = int_0^inf exp(-pi int_0^u F) du`.
pub fn m_of(f: &StepCdf) -> ExtReal {
    f.exp_tail(0.0, PI)
}

/// Plug-in estimate of `m_F` from the first estimator.
pub fn m_hat(f0: &StepCdf) -> Result<f64> {
    m_of(f0).finite().ok_or(Error::ZeroFunction("m"))
}

/// Volume-biased weight distribution `F^V(z)` induced by `f`.
///
/// In the plane this is the closed form
/// `1 - exp(-pi I(z)) + pi F(z) int_z^inf exp(-pi I)`, with `I = int_0 F`;
/// other dimensions integrate the general expression numerically.
pub fn forward_fv(f: &StepCdf, dim: &DimensionParams, z: f64) -> Result<f64> {
    if f.terminal() <= 0.0 {
        return Err(Error::ZeroFunction("volume-biased distribution"));
    }
    if dim.d == 2 {
        let tail = f.exp_tail(z, PI).finite().expect("terminal value is positive");
        return Ok(1.0 - (-PI * f.integral(z)).exp() + PI * f.eval(z) * tail);
    }
    Ok(forward_fv_quadrature(f, dim, z))
}

/// The general-dimension expression, by quadrature. Also serves as an
/// independent check of the planar closed form.
pub fn forward_fv_quadrature(f: &StepCdf, dim: &DimensionParams, z: f64) -> f64 {
    let p = dim.half_d();
    let damp = |u: f64| (-dim.kappa * f.weighted_stieltjes(u, |t| (u - t).powf(p))).exp();
    let inner = |u: f64| f.weighted_stieltjes(z, |h| (u - h).powf(p - 1.0));
    let integrand = |u: f64| {
        let v = damp(u) * inner(u);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let mut knots: Vec<f64> = std::iter::once(z.max(0.0))
        .chain(f.locations().iter().copied().filter(|&h| h > z))
        .collect();
    knots.dedup();
    let mut acc = CompensatedSum::new();
    for w in knots.windows(2) {
        acc.add(integrate(integrand, w[0], w[1], 1e-12));
    }
    acc.add(integrate_tail(integrand, *knots.last().unwrap(), 1e-12));
    let first = 1.0 - damp(z);
    first + dim.omega / 2.0 * acc.value()
}

/// Planar `F^V` evaluated at every jump of `f`, as a step function with
/// the same jump locations.
pub fn forward_fv_step(f: &StepCdf) -> Result<StepCdf> {
    let tails = f
        .exp_tails_at_jumps(PI)
        .ok_or(Error::ZeroFunction("volume-biased distribution"))?;
    let ints = f.integrals_at_jumps();
    let mut prev: f64 = 0.0;
    let pts: Vec<(f64, f64)> = f
        .points()
        .enumerate()
        .map(|(i, (h, v))| {
            let fv = (1.0 - (-PI * ints[i]).exp() + PI * v * tails[i]).clamp(0.0, 1.0);
            prev = prev.max(fv);
            (h, prev)
        })
        .collect();
    StepCdf::new(pts)
}

/// `V(z; F, m) = 1 - exp(-pi I(z)) + pi F(z) (m - int_0^z exp(-pi I))`.
pub fn forward_v(f: &StepCdf, m: f64, z: f64) -> f64 {
    1.0 - (-PI * f.integral(z)).exp() + PI * f.eval(z) * (m - f.exp_head(z, PI))
}

/// A step of [`invert_v`] where the recursion would have made the estimate
/// decrease (or blow up) and the previous level was kept instead.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClampWarning {
    pub index: usize,
    pub location: f64,
    pub numerator: f64,
    pub denominator: f64,
}

impl fmt::Display for ClampWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "jump {} at h = {}: ratio {}/{} is not a valid growth factor; previous level kept",
            self.index, self.location, self.numerator, self.denominator
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VInversion {
    pub f: StepCdf,
    pub warnings: Vec<ClampWarning>,
}

/// Recovers `F` from `F^V` and `m`.
///
/// The first level is `F^V(h_1) / (pi (m - h_1))`; afterwards
/// `F(h_i) = F(h_{i-1}) (F^V(h_i) - 1 + E_i) / (F^V(h_{i-1}) - 1 + E_i)`
/// with `E_i = exp(-pi int_0^{h_i} F)`. The numerator never falls below the
/// denominator, so the recursion only breaks down when the denominator is
/// not positive; those steps are clamped and reported.
pub fn invert_v(fv: &StepCdf, m: f64) -> Result<VInversion> {
    let locs = fv.locations();
    let Some(&h1) = locs.first() else {
        return Err(Error::TooFewJumps { needed: 1, found: 0 });
    };
    if m.is_nan() || m <= h1 {
        return Err(Error::MeanNotAboveFirstJump { m, h1 });
    }
    let vals = fv.values();
    let mut out = Vec::with_capacity(locs.len());
    let mut warnings = Vec::new();
    let mut level = vals[0] / (PI * (m - h1));
    if !level.is_finite() {
        return Err(Error::Overflow("the inverse of V"));
    }
    out.push(level);
    let mut integral = 0.0;
    for i in 1..locs.len() {
        integral += level * (locs[i] - locs[i - 1]);
        let e = (-PI * integral).exp();
        // F^V - 1 + E, written to avoid forming 1 - tiny
        let num = e - (1.0 - vals[i]);
        let den = e - (1.0 - vals[i - 1]);
        let ratio = if num > 0.0 && den > 0.0 {
            (num.ln() - den.ln()).exp()
        } else {
            f64::NAN
        };
        let next = level * ratio;
        if next.is_finite() && next >= level {
            level = next;
        } else {
            warnings.push(ClampWarning {
                index: i,
                location: locs[i],
                numerator: num,
                denominator: den,
            });
        }
        out.push(level);
    }
    Ok(VInversion {
        f: StepCdf::new(locs.iter().copied().zip(out))?,
        warnings,
    })
}

/// First estimator: invert the empirical own-cell intensity.
pub fn estimate_f0(inp: &EmpiricalInputs) -> Result<StepCdf> {
    let dim = DimensionParams::new(inp.gens.d);
    invert_g(&empirical_g(inp)?, &dim)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeEstimate {
    pub f: StepCdf,
    pub f0: StepCdf,
    pub fv: StepCdf,
    pub m_hat: f64,
    pub warnings: Vec<ClampWarning>,
}

/// Second estimator: `m` from the first estimator, `F^V` from cell areas,
/// both on the same counting window.
pub fn estimate_f(inp: &EmpiricalInputs) -> Result<VolumeEstimate> {
    let f0 = estimate_f0(inp)?;
    let m = m_hat(&f0)?;
    let (_, fv) = empirical_fv(inp)?;
    let VInversion { f, warnings } = invert_v(&fv, m)?;
    Ok(VolumeEstimate {
        f,
        f0,
        fv,
        m_hat: m,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WeightedPoint;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sf(points: &[(f64, f64)]) -> StepCdf {
        StepCdf::new(points.iter().copied()).unwrap()
    }

    fn d2() -> DimensionParams {
        DimensionParams::planar()
    }

    #[test]
    fn dimension_constants() {
        let p = d2();
        assert_relative_eq!(p.kappa, PI);
        for d in 2..6 {
            let p = DimensionParams::new(d);
            assert_relative_eq!(p.omega, d as f64 * p.kappa, epsilon = 1e-12);
        }
    }

    #[test]
    fn forward_g_examples() {
        assert_eq!(forward_g(&sf(&[(1.0, 0.7)]), &d2()), sf(&[(1.0, 0.7)]));
        assert_eq!(forward_g(&StepCdf::zero(), &d2()), StepCdf::zero());
        let g = forward_g(&sf(&[(1.0, 0.5), (2.0, 1.0)]), &d2());
        assert_relative_eq!(g.eval(2.0), 0.5 + 0.5 * (-PI / 2.0).exp(), epsilon = 1e-15);
        assert_relative_eq!(g.eval(2.0), 0.603_940, epsilon = 5e-7);
    }

    #[test]
    fn invert_g_examples() {
        assert_eq!(invert_g(&sf(&[(1.0, 0.7)]), &d2()).unwrap(), sf(&[(1.0, 0.7)]));
        assert_eq!(invert_g(&StepCdf::zero(), &d2()).unwrap(), StepCdf::zero());
        let g = sf(&[(1.0, 0.5), (2.0, 0.5 + 0.5 * (-PI / 2.0).exp())]);
        let f = invert_g(&g, &d2()).unwrap();
        assert_relative_eq!(f.eval(2.0), 1.0, epsilon = 1e-14);
        let g = sf(&[(1.0, 0.5), (2.0, 0.60395)]);
        assert_relative_eq!(invert_g(&g, &d2()).unwrap().eval(2.0), 1.0, epsilon = 1e-4);
    }

    #[test]
    fn thinned_intensity_reduces_to_g() {
        let f = sf(&[(1.0, 0.01), (8.0, 0.05), (10.0, 1.0)]);
        let g = forward_g(&f, &d2());
        for z in [0.5, 1.0, 5.0, 8.0, 10.0, 12.0] {
            assert_relative_eq!(intensity_thinned(&f, &d2(), 0.0, z), g.eval(z), epsilon = 1e-15);
        }
        assert_eq!(intensity_thinned(&f, &d2(), 0.3, 0.9), 0.0);
        let single = sf(&[(1.0, 0.4)]);
        assert_relative_eq!(intensity_thinned(&single, &d2(), 0.0, 3.0), 0.4);
        let mut prev = f64::INFINITY;
        for y2 in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let v = intensity_thinned(&f, &d2(), y2, 10.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn forward_fv_examples() {
        let h1 = 1.3;
        let single = sf(&[(h1, 0.8)]);
        assert_relative_eq!(forward_fv(&single, &d2(), h1).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(forward_fv(&single, &d2(), 1.0).unwrap(), 0.0);
        assert!(forward_fv(&StepCdf::zero(), &d2(), 1.0).is_err());
        let f = sf(&[(0.5, 1.0), (1.0, 2.0)]);
        let closed = forward_fv(&f, &d2(), 0.5).unwrap();
        let quad = forward_fv_quadrature(&f, &d2(), 0.5);
        assert_relative_eq!(closed, quad, epsilon = 1e-8);
    }

    #[test]
    fn forward_fv_general_dimension_is_a_cdf() {
        let f = sf(&[(0.5, 1.0), (1.0, 2.0), (2.0, 2.5)]);
        let dim = DimensionParams::new(3);
        let mut prev = 0.0;
        for z in [0.2, 0.5, 0.7, 1.0, 1.5, 2.0, 4.0] {
            let v = forward_fv(&f, &dim, z).unwrap();
            assert!(v >= prev - 1e-10 && v <= 1.0 + 1e-9);
            prev = v;
        }
        assert_relative_eq!(prev, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn forward_fv_step_matches_pointwise() {
        let f = sf(&[(0.5, 1.0), (1.0, 2.0), (3.0, 2.5)]);
        let s = forward_fv_step(&f).unwrap();
        for &h in f.locations() {
            assert_relative_eq!(s.eval(h), forward_fv(&f, &d2(), h).unwrap(), epsilon = 1e-13);
        }
        assert_relative_eq!(s.terminal(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn m_hat_examples() {
        assert_relative_eq!(m_hat(&sf(&[(1.0, 2.0)])).unwrap(), 1.159_155, epsilon = 5e-7);
        assert!(m_hat(&StepCdf::zero()).is_err());
        assert_relative_eq!(m_hat(&sf(&[(0.5, 1.0), (1.0, 2.0)])).unwrap(), 0.785_225, epsilon = 5e-7);
    }

    #[test]
    fn invert_v_examples() {
        let (h1, a) = (2.0, 0.3);
        let m = h1 + 1.0 / (PI * a);
        let r = invert_v(&sf(&[(h1, 1.0)]), m).unwrap();
        assert_relative_eq!(r.f.eval(h1), a, epsilon = 1e-14);
        assert!(r.warnings.is_empty());
        let r = invert_v(&sf(&[(1.0, 0.3), (2.0, 1.0)]), 1.159155).unwrap();
        assert_relative_eq!(r.f.eval(1.0), 0.6, epsilon = 1e-5);
        assert!(matches!(invert_v(&sf(&[(1.0, 1.0)]), 1.0), Err(Error::MeanNotAboveFirstJump { .. })));
    }

    #[test]
    fn invert_v_clamps_with_warning() {
        // A tiny second-to-last level forces a nonpositive denominator.
        let fv = sf(&[(1.0, 0.001), (8.0, 0.002), (10.0, 1.0)]);
        let r = invert_v(&fv, 1.5).unwrap();
        assert!(!r.warnings.is_empty());
        assert!(r.f.values().windows(2).all(|w| w[0] <= w[1]));
        let w = &r.warnings[0];
        assert!(w.denominator <= 0.0);
        assert!(w.to_string().contains("previous level kept"));
    }

    #[test]
    fn forward_v_examples() {
        let f = sf(&[(1.0, 1.0)]);
        let m = m_of(&f).finite().unwrap();
        for z in [0.0, 0.5, 1.0, 2.0] {
            assert_relative_eq!(forward_v(&f, m, z), forward_fv(&f, &d2(), z).unwrap(), epsilon = 1e-14);
        }
        assert_eq!(forward_v(&f, m, 0.0), 0.0);
        assert_relative_eq!(forward_v(&f, m + 0.1, 1.0), 1.0 + PI * 0.1, epsilon = 1e-13);
    }

    fn window(side: f64) -> Window {
        Window::new(vec![0.0, 0.0], vec![side, side]).unwrap()
    }

    fn gens(side: f64, pts: Vec<WeightedPoint>) -> GeneratorSet {
        GeneratorSet {
            d: 2,
            window: window(side),
            guard: 0.0,
            points: pts,
        }
    }

    #[test]
    fn empirical_g_examples() {
        let none = EmpiricalInputs::new(gens(1.0, vec![]), Erosion::Auto).unwrap();
        assert_eq!(empirical_g(&none).unwrap(), StepCdf::zero());

        // the third point is dominated by the first (0.5 - 0.1 > 0.1^2)
        let pts = vec![
            WeightedPoint::planar(0.5, 0.5, 0.1),
            WeightedPoint::planar(0.1, 0.1, 0.2),
            WeightedPoint::planar(0.6, 0.5, 0.5),
        ];
        let inp = EmpiricalInputs::new(gens(1.0, pts), Erosion::Auto).unwrap();
        assert_eq!(inp.own_cell, vec![true, true, false]);
        let g = empirical_g(&inp).unwrap();
        assert_eq!(g.eval(0.15), 1.0);
        assert_eq!(g.eval(0.3), 2.0);
        assert_eq!(g.eval(1.0), 2.0);

        let inp = EmpiricalInputs::new(gens(2.0, vec![WeightedPoint::planar(1.0, 1.0, 1.0)]), Erosion::Auto).unwrap();
        assert_eq!(empirical_g(&inp).unwrap().eval(1.0), 0.25);
    }

    #[test]
    fn erosion_must_cover_guard() {
        let mut g = gens(4.0, vec![WeightedPoint::planar(1.0, 1.0, 1.0)]);
        g.guard = 1.0;
        assert!(EmpiricalInputs::new(g.clone(), Erosion::Margin(0.5)).is_err());
        let inp = EmpiricalInputs::new(g.clone(), Erosion::Margin(1.5)).unwrap();
        assert_relative_eq!(inp.count_window.volume(), 9.0);
        let inp = EmpiricalInputs::new(g, Erosion::Auto).unwrap();
        assert_eq!(inp.count_window, window(4.0));
    }

    #[test]
    fn empirical_fv_normalisations() {
        // two equal-weight generators side by side in a padded region
        let mut g = gens(4.0, vec![WeightedPoint::planar(1.0, 2.0, 1.0), WeightedPoint::planar(3.0, 2.0, 1.0)]);
        g.guard = 1.0;
        let inp = EmpiricalInputs::new(g, Erosion::Auto).unwrap().with_tessellation().unwrap();
        // both cells reach the region boundary
        assert!(matches!(empirical_fv(&inp), Err(Error::NoQualifyingCells)));

        // a central cell enclosed by a ring of heavier generators
        let mut pts = vec![WeightedPoint::planar(5.0, 5.0, 1.0)];
        for k in 0..8 {
            let a = k as f64 * PI / 4.0;
            pts.push(WeightedPoint::planar(5.0 + 2.0 * a.cos(), 5.0 + 2.0 * a.sin(), 1.0));
        }
        let inp = EmpiricalInputs::new(gens(10.0, pts), Erosion::Auto)
            .unwrap()
            .with_tessellation()
            .unwrap();
        let (tilde, hat) = empirical_fv(&inp).unwrap();
        let area = inp.tessellation.as_ref().unwrap().cells[0].area;
        assert_eq!(hat, sf(&[(1.0, 1.0)]));
        assert_relative_eq!(tilde.eval(1.0), area / 100.0, epsilon = 1e-14);
    }

    #[test]
    fn hat_ratio_example() {
        // cells of area 1 and 3 with weights 1 and 2
        let pts = vec![WeightedPoint::planar(0.5, 0.5, 1.0), WeightedPoint::planar(2.5, 0.5, 2.0)];
        let mut inp = EmpiricalInputs::new(gens(4.0, pts), Erosion::Auto).unwrap();
        let clip = crate::geometry::Rect::new(-10.0, -10.0, 10.0, 10.0).unwrap();
        let cells = vec![
            crate::geometry::LaguerreCell {
                index: 0,
                polygon: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
                area: 1.0,
                is_empty: false,
                contains_own_generator: true,
                touches_clip_boundary: false,
            },
            crate::geometry::LaguerreCell {
                index: 1,
                polygon: vec![[1.0, 0.0], [4.0, 0.0], [4.0, 1.0], [1.0, 1.0]],
                area: 3.0,
                is_empty: false,
                contains_own_generator: true,
                touches_clip_boundary: false,
            },
        ];
        inp.tessellation = Some(Tessellation { cells, clip });
        let (_, hat) = empirical_fv(&inp).unwrap();
        assert_eq!(hat, sf(&[(1.0, 0.25), (2.0, 1.0)]));
    }

    fn arb_f(max_loc: f64, max_val: f64) -> impl Strategy<Value = StepCdf> {
        prop::collection::vec((1e-3f64..max_loc, 1e-3f64..1.0), 1..50).prop_map(move |atoms| {
            let f = StepCdf::from_atoms(atoms).unwrap();
            let s = max_val / f.terminal();
            f.scaled(s.min(1.0))
        })
    }

    proptest! {
        #[test]
        fn forward_g_is_dominated(f in arb_f(10.0, 10.0), z in 0.0f64..11.0) {
            let g = forward_g(&f, &d2());
            prop_assert!(g.eval(z) <= f.eval(z) * (1.0 + 1e-14));
            prop_assert_eq!(g.locations(), f.locations());
        }

        // Beyond moderate `kappa * sum (h_i - h_j) dF_j` the jumps of G drop
        // below the rounding of its cumulative values and cannot be recovered.
        #[test]
        fn g_round_trip(f in arb_f(2.0, 1.0)) {
            let back = invert_g(&forward_g(&f, &d2()), &d2()).unwrap();
            prop_assert!(back.sup_distance(&f) <= 1e-9 * (1.0 + f.terminal()));
        }

        #[test]
        fn v_round_trip(f in arb_f(2.0, 3.0)) {
            let m = m_of(&f).finite().unwrap();
            let fv = forward_fv_step(&f).unwrap();
            let r = invert_v(&fv, m).unwrap();
            prop_assert!(r.warnings.is_empty());
            prop_assert!(r.f.sup_distance(&f) <= 1e-7, "sup {}", r.f.sup_distance(&f));
            let m_back = m_of(&r.f).finite().unwrap();
            prop_assert!((m_back - m).abs() <= 1e-7);
        }
    }
}
