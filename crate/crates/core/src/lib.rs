//! Simulation and nonparametric inference for Poisson–Laguerre tessellations.
//!
//! The crate is organised bottom-up:
//!
//! * [`stepfn`] — exact calculus for step distribution functions;
//! * [`geometry`] — planar Laguerre (power) diagrams;
//! * [`process`] — weighted Poisson generator sets and the section map;
//! * [`estimators`] — the forward transforms and the two inverse estimators
//!   of the weight distribution;
//! * [`stereology`] — Abel unfolding and the isotonic estimator of the
//!   spatial weight distribution from planar sections;
//! * [`harness`] — Monte Carlo studies over the whole pipeline;
//! * [`cli`] — the `plt` command-line front end.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod numeric;
pub mod plot;
pub mod process;
pub mod stepfn;
pub mod stereology;

pub use error::{Error, Result};
pub use numeric::ExtReal;
pub use stepfn::StepCdf;
