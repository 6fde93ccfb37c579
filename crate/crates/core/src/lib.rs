//! Hölder-space diagnostics for partial-sum processes.

pub mod bounds;
pub mod counterexample;
pub mod error;
pub mod holder;
pub mod paths;
pub mod process;
pub mod stats;
pub mod weak_lp;

pub use error::{Error, Result};
pub use paths::{build_polygonal, PolygonalPath};
