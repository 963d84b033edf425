//! Run a Monte Carlo study from a JSON config and print its table.
//!
//! ```text
//! cargo run --release --example simulation_study -- configs/paper_table1.json
//! ```

use std::path::PathBuf;

use poisson_laguerre::harness::{run_study, write_results_csv, StudyConfig};
use poisson_laguerre::Result;

fn main() -> Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/fig4_uniform.json"));
    let cfg = StudyConfig::load(&path)?;
    let stats = run_study(&cfg)?;
    write_results_csv(&stats, std::io::stdout().lock())?;
    for s in &stats {
        eprintln!(
            "{} P_n={}: {} replications, {} excluded, {} clamp warnings",
            s.estimator.name(),
            s.pn,
            s.n_reps,
            s.n_excluded,
            s.n_warnings
        );
    }
    Ok(())
}
