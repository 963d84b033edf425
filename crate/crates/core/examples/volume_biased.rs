//! The second estimator: cell areas give the volume-biased distribution,
//! which is inverted with the mean area estimated by the first estimator.

use poisson_laguerre::estimators::{estimate_f, EmpiricalInputs, Erosion};
use poisson_laguerre::process::{default_guard, sample, window_for_target_count, CdfModel};
use poisson_laguerre::Result;

fn main() -> Result<()> {
    let model = CdfModel::f1(1.0);
    let window = window_for_target_count(&model, 2, 1000.0)?;
    let gens = sample(&model, &window, default_guard(&model), 11)?;
    let inp = EmpiricalInputs::new(gens, Erosion::Auto)?.with_tessellation()?;
    let est = estimate_f(&inp)?;

    println!("estimated mean area factor m = {:.5}", est.m_hat);
    println!("{:>5} {:>8} {:>8} {:>8} {:>8}", "z", "F^V_n", "F_n^0", "F_n", "F");
    for z in [0.1, 0.25, 0.5, 0.75, 0.95] {
        println!(
            "{z:>5} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            est.fv.eval(z),
            est.f0.eval(z),
            est.f.eval(z),
            model.eval(z)
        );
    }
    for w in &est.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
