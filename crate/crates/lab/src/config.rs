use std::path::{Path, PathBuf};

use hoelder_core::process::{Coefficients, GeneratorSpec, Innovation, ScheduleRef};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Donsker,
    TailBoundary,
    Counterexample,
    Hannan,
    Inequalities,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Donsker => "donsker",
            ExperimentKind::TailBoundary => "tail_boundary",
            ExperimentKind::Counterexample => "counterexample",
            ExperimentKind::Hannan => "hannan",
            ExperimentKind::Inequalities => "inequalities",
        }
    }
}

fn half() -> f64 {
    0.5
}

fn ks_default() -> usize {
    100_000
}

fn seeds_default() -> usize {
    20
}

/// One experiment run. Fields not used by the chosen experiment are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
    pub p: f64,
    pub n_grid: Vec<usize>,
    pub replicas: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub j_grid: Vec<u32>,
    #[serde(default = "half")]
    pub epsilon: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,

    /// Reference draws for the endpoint KS test.
    #[serde(default = "ks_default")]
    pub ks_reference: usize,

    /// Tail exponents; defaults to `p` and `2p`.
    #[serde(default)]
    pub betas: Vec<f64>,
    /// Fixed threshold `M`; taken from a pilot run when absent.
    #[serde(default)]
    pub threshold: Option<f64>,
    /// Replicas of the threshold pilot; defaults to `replicas`.
    #[serde(default)]
    pub pilot_replicas: Option<usize>,

    #[serde(default)]
    pub schedule: Option<ScheduleRef>,
    /// Declared lower floors for the modulus event, one per level.
    #[serde(default)]
    pub floors: Vec<f64>,

    #[serde(default)]
    pub coefficients: Option<Coefficients>,
    #[serde(default)]
    pub innovation: Option<Innovation>,
    #[serde(default)]
    pub k_grid: Vec<usize>,
    #[serde(default = "seeds_default")]
    pub seeds: usize,
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(experiment: ExperimentKind, p: f64, n_grid: Vec<usize>, replicas: usize) -> Self {
        Self {
            experiment,
            generator: None,
            p,
            n_grid,
            replicas,
            seed: 0,
            j_grid: Vec::new(),
            epsilon: half(),
            output_dir: None,
            ks_reference: ks_default(),
            betas: Vec::new(),
            threshold: None,
            pilot_replicas: None,
            schedule: None,
            floors: Vec::new(),
            coefficients: None,
            innovation: None,
            k_grid: Vec::new(),
            seeds: seeds_default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if !(self.p > 2.0 && self.p.is_finite()) {
            return bad(format!("p must exceed 2, got {}", self.p));
        }
        if self.replicas == 0 {
            return bad("replicas must be at least 1".into());
        }
        if self.n_grid.is_empty() {
            return bad("n_grid is empty".into());
        }
        if self.n_grid.iter().any(|n| *n < 2) {
            return bad("every n must be at least 2".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be positive".into());
        }
        if self.betas.iter().any(|b| !(*b > 2.0 && b.is_finite())) {
            return bad("tail exponents must exceed 2".into());
        }
        if let Some(m) = self.threshold {
            if !(m > 0.0 && m.is_finite()) {
                return bad("threshold must be positive".into());
            }
        }
        if self.pilot_replicas == Some(0) {
            return bad("pilot_replicas must be at least 1".into());
        }
        if self.floors.iter().any(|f| !(*f >= 0.0 && *f <= 1.0)) {
            return bad("floors are probabilities".into());
        }
        if self.seeds == 0 {
            return bad("seeds must be at least 1".into());
        }
        if let Some(inn) = &self.innovation {
            inn.validate().map_err(|e| LabError::Config(e.to_string()))?;
        }
        if self.experiment == ExperimentKind::Donsker && self.ks_reference == 0 {
            return bad("ks_reference must be at least 1".into());
        }
        Ok(())
    }
}
