//! The damped transform `F -> G` and the volume-biased transform `F -> F^V`,
//! with their exact inverses.

use poisson_laguerre::estimators::{forward_fv_step, forward_g, invert_g, invert_v, m_of, DimensionParams};
use poisson_laguerre::{Result, StepCdf};

fn main() -> Result<()> {
    let f = StepCdf::new([(0.2, 0.3), (0.7, 0.6), (1.5, 1.0)])?;
    for d in [2, 3] {
        let dim = DimensionParams::new(d);
        let g = forward_g(&f, &dim);
        let back = invert_g(&g, &dim)?;
        println!("d={d}: G = {:?}", g.values());
        println!("      round trip error {:.1e}", back.sup_distance(&f));
    }

    let m = m_of(&f).finite().expect("F has positive mass");
    let fv = forward_fv_step(&f)?;
    let inv = invert_v(&fv, m)?;
    println!("m_F = {m:.6}");
    println!("F^V = {:?}", fv.values());
    println!("recovered F error {:.1e}, clamps {}", inv.f.sup_distance(&f), inv.warnings.len());
    Ok(())
}
