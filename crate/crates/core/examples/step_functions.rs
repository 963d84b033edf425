//! Exact calculus on step distribution functions.

use std::f64::consts::PI;

use poisson_laguerre::{Result, StepCdf};

fn main() -> Result<()> {
    let f = StepCdf::new([(0.5, 1.0), (1.0, 2.0)])?;
    println!("F = {:?}", f.points().collect::<Vec<_>>());
    for z in [0.25, 0.5, 0.75, 1.0, 2.0] {
        println!("F({z}) = {}, int_0^z F = {}", f.eval(z), f.integral(z));
    }
    // int sqrt(1 - t) dF(t) over [0, 1]
    println!("int sqrt(1-t) dF = {:.6}", f.weighted_stieltjes(1.0, |t| (1.0 - t).sqrt()));
    // int_0^inf exp(-pi int_0^u F) du, the mean cell area of the first estimator
    println!("int exp(-pi I) = {}", f.exp_tail(0.0, PI));
    println!("same with F = 0: {}", StepCdf::zero().exp_tail(0.0, PI));
    Ok(())
}
