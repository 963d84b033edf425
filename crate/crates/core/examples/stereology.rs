//! Planar sections of a spatial tessellation: recover the spatial weight
//! distribution `H` from the section's own-cell weights.

use poisson_laguerre::estimators::{estimate_f0, EmpiricalInputs, Erosion};
use poisson_laguerre::process::{section_sample, CdfModel, SectionModel};
use poisson_laguerre::stereology::{isotonic_h, plugin_h};
use poisson_laguerre::Result;

fn main() -> Result<()> {
    let h = CdfModel::f1(1.0);
    let sec = SectionModel::new(h.clone())?;
    let hmax = sec.default_hmax();
    let window = sec.window_for_target_count(1000.0)?;
    let gens = section_sample(&h, &window, sec.default_guard(hmax), hmax, 3)?;
    println!("section: {} planar generators, weights truncated at {hmax:.3}", gens.points.len());

    let fbar = estimate_f0(&EmpiricalInputs::new(gens, Erosion::Auto)?)?;
    let iso = isotonic_h(&fbar, None)?;
    println!("{:>5} {:>9} {:>9} {:>9}", "z", "plug-in", "isotonic", "H");
    for z in [0.1, 0.3, 0.5, 0.7, 0.9] {
        println!("{z:>5} {:>9.4} {:>9.4} {:>9.4}", plugin_h(&fbar, z), iso.h.eval(z), h.eval(z));
    }
    Ok(())
}
