use std::path::Path;

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "n-a")]
    NotApplicable,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One CSV line. `index` names the non-`n` parameters, e.g. `J=4` or
/// `beta=8`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub experiment: String,
    pub statistic: String,
    pub n: u64,
    pub index: String,
    pub estimate: f64,
    pub mc_se: f64,
    pub threshold: f64,
    pub status: Status,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: ExperimentReport) {
        self.rows.extend(other.rows);
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.status == Status::Fail)
    }

    pub fn all_pass(&self) -> bool {
        self.failures().next().is_none()
    }

    /// First row with this statistic and index.
    pub fn find(&self, statistic: &str, index: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.statistic == statistic && r.index == index)
    }

    pub fn select<'a>(&'a self, statistic: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.statistic == statistic)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record([
                "experiment",
                "statistic",
                "n",
                "index",
                "estimate",
                "mc_se",
                "threshold",
                "status",
                "seed",
            ])?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?)?;
        Ok(())
    }
}

/// Row builder for one experiment and seed.
#[derive(Debug, Clone)]
pub struct RowMaker {
    pub experiment: &'static str,
    pub seed: u64,
}

impl RowMaker {
    #[allow(clippy::too_many_arguments)]
    pub fn row(
        &self,
        statistic: impl Into<String>,
        n: u64,
        index: impl Into<String>,
        estimate: f64,
        mc_se: f64,
        threshold: f64,
        status: Status,
    ) -> ReportRow {
        ReportRow {
            experiment: self.experiment.to_string(),
            statistic: statistic.into(),
            n,
            index: index.into(),
            estimate,
            mc_se,
            threshold,
            status,
            seed: self.seed,
        }
    }

    /// An informational row with no pass criterion.
    pub fn info(
        &self,
        statistic: impl Into<String>,
        n: u64,
        index: impl Into<String>,
        estimate: f64,
        mc_se: f64,
    ) -> ReportRow {
        self.row(statistic, n, index, estimate, mc_se, f64::NAN, Status::NotApplicable)
    }
}
