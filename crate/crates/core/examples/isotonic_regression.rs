//! Weighted isotonic regression and the greatest convex minorant.

use poisson_laguerre::stereology::{greatest_convex_minorant, pava, IsotonicProblem};
use poisson_laguerre::Result;

fn main() -> Result<()> {
    let p = IsotonicProblem::new(vec![1.0, 3.0, 2.0, -1.0, 4.0, 5.0], vec![1.0, 1.0, 2.0, 1.0, 1.0, 0.5])?;
    let fit = pava(&p);
    println!("y    = {:?}", p.y);
    println!("beta = {:?}", fit.beta);
    println!("blocks {:?}, objective {:.4}", fit.blocks, p.objective(&fit.beta));

    // the slopes of the minorant of the cumulative sums are the same fit
    let mut pts = vec![(0.0, 0.0)];
    for (y, w) in p.y.iter().zip(&p.w) {
        let (x0, s0) = *pts.last().unwrap();
        pts.push((x0 + w, s0 + w * y));
    }
    let hull = greatest_convex_minorant(&pts);
    let slopes: Vec<f64> = hull.windows(2).map(|s| (s[1].1 - s[0].1) / (s[1].0 - s[0].0)).collect();
    println!("minorant slopes {slopes:?} (negative ones clamp to 0)");
    Ok(())
}
