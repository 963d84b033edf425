//! Independent numerical oracles. These deliberately avoid the crate's own
//! closed forms: everything is computed by brute-force sums or by adaptive
//! quadrature of the defining integrals.

#![allow(dead_code)]

use std::f64::consts::PI;

use poisson_laguerre::StepCdf;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Tanh-sinh quadrature on a finite interval.
pub fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    quadrature::double_exponential::integrate(f, a, b, 1e-12).integral
}

/// Quadrature split at the given interior breakpoints.
pub fn quad_pieces(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]) -> f64 {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.windows(2).map(|w| quad(&f, w[0], w[1])).sum()
}

/// `int_0^z F`, by summing rectangles.
pub fn integral(f: &StepCdf, z: f64) -> f64 {
    f.jumps().map(|(h, dv)| dv * (z - h).max(0.0)).sum()
}

/// `int_z^inf exp(-c int_0^u F) du`: quadrature up to the last jump, then the
/// exact exponential tail.
pub fn exp_tail(f: &StepCdf, z: f64, c: f64) -> f64 {
    let last = f.locations().last().copied().unwrap_or(0.0).max(z);
    let head = quad_pieces(|u| (-c * integral(f, u)).exp(), z, last, f.locations());
    head + (-c * integral(f, last)).exp() / (c * f.terminal())
}

/// `G(z) = int_{[0,z]} exp(-kappa int (u - h)_+^{d/2} dF(h)) dF(u)`, summing
/// over every atom and every (including non-earlier) partner.
pub fn forward_g(f: &StepCdf, d: usize, z: f64) -> f64 {
    let kappa = PI.powf(d as f64 / 2.0) / gamma(1.0 + d as f64 / 2.0);
    let atoms: Vec<(f64, f64)> = f.jumps().collect();
    atoms
        .iter()
        .filter(|(u, _)| *u <= z)
        .map(|&(u, du)| {
            let s: f64 = atoms
                .iter()
                .map(|&(h, dh)| dh * (u - h).max(0.0).powf(d as f64 / 2.0))
                .sum();
            du * (-kappa * s).exp()
        })
        .sum()
}

/// Lanczos gamma, enough for half-integers.
pub fn gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Volume-biased weight distribution in the plane, straight from its
/// integral form:
/// `1 - exp(-pi I(z)) + pi int_z^inf exp(-pi I(u)) F(z) du`.
pub fn fv_planar(f: &StepCdf, z: f64) -> f64 {
    1.0 - (-PI * integral(f, z)).exp() + PI * f.eval(z) * exp_tail(f, z, PI)
}

/// Same quantity for general `d`, via the d-dimensional formula
/// `1 - exp(-kappa P(z)) + (omega/2) int_z^inf exp(-kappa P(u))
///  sum_{h_j <= z} (u - h_j)^{d/2 - 1} dF_j du`, `P(u) = int (u-h)_+^{d/2} dF`.
pub fn fv_general(f: &StepCdf, d: usize, z: f64) -> f64 {
    let half = d as f64 / 2.0;
    let kappa = PI.powf(half) / gamma(1.0 + half);
    let omega = d as f64 * kappa;
    let atoms: Vec<(f64, f64)> = f.jumps().collect();
    let p = |u: f64| -> f64 { atoms.iter().map(|&(h, dh)| dh * (u - h).max(0.0).powf(half)).sum() };
    let inner = |u: f64| -> f64 {
        atoms
            .iter()
            .filter(|(h, _)| *h <= z)
            .map(|&(h, dh)| dh * (u - h).powf(half - 1.0))
            .sum()
    };
    let g = |u: f64| (-kappa * p(u)).exp() * inner(u);
    let last = atoms.last().map_or(z, |a| a.0).max(z);
    // past the last atom the integrand decays like exp(-kappa P(u)); stop
    // once that factor is below e^-45
    let mut end = last + 1.0;
    while kappa * p(end) < 45.0 {
        end = last + 2.0 * (end - last);
    }
    let tail = quad_pieces(g, last, end, &[last + 1.0, last + 4.0, last + 16.0]);
    1.0 - (-kappa * p(z)).exp() + omega / 2.0 * (quad_pieces(g, z, last, f.locations()) + tail)
}

/// `(1/pi) int_0^z f(t) (z - t)^{-1/2} dt` for `f = F'` with
/// `F(t) = 2 sum dH_j sqrt(t - h_j)_+`. Each piece between breakpoints is
/// mapped with `t = a + (b - a) sin^2(theta)`, which removes the inverse
/// square-root singularities at both ends.
pub fn abel_inverse(h: &StepCdf, z: f64) -> f64 {
    let atoms: Vec<(f64, f64)> = h.jumps().collect();
    let density = |t: f64| -> f64 {
        atoms
            .iter()
            .filter(|(hj, _)| *hj < t)
            .map(|&(hj, dh)| dh / (t - hj).sqrt())
            .sum()
    };
    let mut pts: Vec<f64> = atoms.iter().map(|a| a.0).filter(|&x| x < z).collect();
    pts.push(z);
    pts.insert(0, 0.0);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let g = |th: f64| {
            let (s, c) = th.sin_cos();
            let t = a + (b - a) * s * s;
            let zt = (b - a) * c * c + (z - b);
            // the sin/cos factors of dt cancel the endpoint singularities
            let near = atoms
                .iter()
                .filter(|(hj, _)| *hj == a)
                .map(|&(_, dh)| dh / ((b - a).sqrt() * s))
                .sum::<f64>();
            let far = density(t) - atoms.iter().filter(|(hj, _)| *hj == a).map(|&(_, dh)| dh / (t - a).sqrt()).sum::<f64>();
            let f_t = near + far;
            let inv = if z == b { 1.0 / ((b - a).sqrt() * c) } else { 1.0 / zt.sqrt() };
            f_t * inv * 2.0 * (b - a) * s * c
        };
        total += quad(g, 0.0, PI / 2.0);
    }
    total / PI
}

/// Brute-force weighted isotonic regression with nonnegativity: enumerate all
/// contiguous partitions, keep the feasible ones, return the best objective.
pub fn brute_force_isotonic(y: &[f64], w: &[f64]) -> (f64, Vec<f64>) {
    let n = y.len();
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 0..(1u32 << (n - 1)) {
        let mut beta = vec![0.0; n];
        let mut start = 0;
        let mut prev = f64::NEG_INFINITY;
        let mut ok = true;
        for i in 0..n {
            if i == n - 1 || mask & (1 << i) != 0 {
                let sw: f64 = w[start..=i].iter().sum();
                let mean = (start..=i).map(|k| w[k] * y[k]).sum::<f64>() / sw;
                let v = mean.max(0.0);
                if v < prev {
                    ok = false;
                    break;
                }
                prev = v;
                beta[start..=i].iter_mut().for_each(|b| *b = v);
                start = i + 1;
            }
        }
        if ok {
            let obj: f64 = (0..n).map(|k| w[k] * (y[k] - beta[k]).powi(2)).sum();
            if obj < best.0 {
                best = (obj, beta);
            }
        }
    }
    best
}

/// Random step distribution with `k` atoms on `(0, max_loc)` and total mass
/// `mass`.
pub fn random_step(r: &mut impl Rng, k: usize, max_loc: f64, mass: f64) -> StepCdf {
    let atoms: Vec<(f64, f64)> = (0..k)
        .map(|_| (max_loc * (1e-3 + (1.0 - 1e-3) * r.random::<f64>()), 1e-3 + r.random::<f64>()))
        .collect();
    let f = StepCdf::from_atoms(atoms).unwrap();
    let s = mass / f.terminal();
    f.scaled(s)
}
