//! The five batch experiments. Each takes a validated config and returns
//! report rows; replica results are collected in replica order, so reports
//! do not depend on the number of worker threads.

mod counterexample;
mod donsker;
mod hannan;
mod inequalities;
mod tail;

pub use counterexample::{run_counterexample, validation_rows, weak_norm_rows};
pub use donsker::run_donsker;
pub use hannan::run_hannan;
pub use inequalities::run_inequalities;
pub use tail::{pilot_threshold, run_tail_boundary};

use hoelder_core::holder::HolderParams;
use hoelder_core::stats::replica_seed;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::report::ExperimentReport;

pub const DEFAULT_J_GRID: [u32; 4] = [2, 4, 6, 8];
pub const DEFAULT_K_GRID: [usize; 4] = [0, 2, 4, 8];

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.experiment {
        ExperimentKind::Donsker => run_donsker(cfg),
        ExperimentKind::TailBoundary => run_tail_boundary(cfg),
        ExperimentKind::Counterexample => run_counterexample(cfg),
        ExperimentKind::Hannan => run_hannan(cfg),
        ExperimentKind::Inequalities => run_inequalities(cfg),
    }
}

pub(crate) fn alpha_of(p: f64) -> Result<f64> {
    Ok(HolderParams::from_p(p)?.alpha())
}

/// Base seed of an independent stream: `stage` separates the phases of one
/// experiment, `index` the cells within a phase.
pub(crate) fn stream(seed: u64, stage: u64, index: u64) -> u64 {
    replica_seed(replica_seed(seed, stage), index)
}

/// Independent two-sample standard error of a difference.
pub(crate) fn diff_se(a: f64, b: f64) -> f64 {
    a.hypot(b)
}
