//! Estimate the weight distribution from own-cell generators only.

use poisson_laguerre::estimators::{empirical_g, estimate_f0, EmpiricalInputs, Erosion};
use poisson_laguerre::process::{default_guard, sample, window_for_target_count, CdfModel};
use poisson_laguerre::Result;

fn main() -> Result<()> {
    let model = CdfModel::f2();
    let window = window_for_target_count(&model, 2, 2000.0)?;
    let gens = sample(&model, &window, default_guard(&model), 7)?;
    let inp = EmpiricalInputs::new(gens, Erosion::Auto)?;
    println!("{} own-cell generators in a window of area {:.1}", inp.own_cell_count(), window.volume());

    let g = empirical_g(&inp)?;
    let f0 = estimate_f0(&inp)?;
    println!("{:>5} {:>9} {:>9} {:>9}", "z", "G_n", "F_n^0", "F");
    for z in [1.0, 5.0, 8.0, 10.0] {
        println!("{z:>5} {:>9.5} {:>9.5} {:>9.5}", g.eval(z), f0.eval(z), model.eval(z));
    }
    Ok(())
}
