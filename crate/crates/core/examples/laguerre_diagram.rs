//! Sample a weighted Poisson process and draw its Laguerre tessellation.
//!
//! ```text
//! cargo run --release --example laguerre_diagram -- [out.svg]
//! ```

use poisson_laguerre::geometry::tessellate;
use poisson_laguerre::plot::{area_quantiles, render_tessellation};
use poisson_laguerre::process::{default_guard, sample, window_for_target_count, CdfModel};
use poisson_laguerre::Result;

fn main() -> Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "laguerre.svg".into());
    let model = CdfModel::f1(1.0);
    let window = window_for_target_count(&model, 2, 200.0)?;
    let gens = sample(&model, &window, default_guard(&model), 2024)?;
    let tess = tessellate(&gens.points, &gens.window.rect()?)?;

    let nonempty = tess.nonempty().count();
    let own = tess.cells.iter().filter(|c| c.contains_own_generator).count();
    println!("{} generators, {nonempty} nonempty cells, {own} containing their generator", gens.points.len());
    println!("window area {:.2}, cell areas sum to {:.6}", window.volume(), tess.total_area());
    println!("area quartiles {:?}", area_quantiles(&tess, 4));

    std::fs::write(&out, render_tessellation(&tess, Some(&gens), 600.0))?;
    println!("wrote {out}");
    Ok(())
}
