//! Sweeps and runs that reproduce the bounds and divergence shapes, plus the
//! command-line front end.

pub mod boundedness;
pub mod cli;
pub mod convergence;
pub mod divergence;
pub mod lebesgue;
pub mod report;

pub use cli::{cli_main, run};
pub use boundedness::{boundedness_sweep, BoundednessConfig};
pub use convergence::{convergence_run, random_martingale, t4b_floor_run, ConvergenceConfig};
pub use divergence::divergence_run;
pub use lebesgue::{lebesgue_sweep, Sample};
pub use report::{Check, ExperimentReport};
