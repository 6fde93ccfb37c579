//! Experiment configuration, CSV reports, the batch experiments and the
//! `hoelder` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{LabError, Result};
pub use report::{ExperimentReport, ReportRow, Status};
