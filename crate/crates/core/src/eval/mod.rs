//! Held-out evaluation and run reports.
//!
//! Report files come in pairs: a CSV with one row per evaluated interval
//! (`interval,test_loglik,baseline_loglik,rate_of_increase`) and a JSON
//! document holding the whole [`EvalReport`], versioned by
//! [`REPORT_SCHEMA_VERSION`].

mod oracle;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use oracle::{exact_posterior_oracle, exact_predictive, OracleFixture, ENUMERATION_BUDGET};

use crate::error::{Error, Result};
use crate::model::{Dyad, DyadRecord};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Probabilities are clamped into `[PROB_FLOOR, 1 − PROB_FLOOR]`.
pub const PROB_FLOOR: f64 = 1e-12;

/// Log-likelihood of one interval's held-out records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalScore {
    pub interval: u32,
    pub loglik: f64,
    /// Zero marks an empty interval.
    pub records: usize,
    pub clamped: usize,
}

impl IntervalScore {
    pub fn is_empty(&self) -> bool {
        self.records == 0
    }
}

/// `Σ log p(y)` over `records`; `predictive` returns the link probability.
pub fn testset_loglik<F>(predictive: F, interval: u32, records: &[DyadRecord]) -> IntervalScore
where
    F: Fn(Dyad) -> f64,
{
    let mut clamped = 0;
    let loglik = records
        .iter()
        .map(|r| {
            let raw = predictive(r.dyad);
            let p = raw.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
            if p != raw {
                clamped += 1;
            }
            if r.present {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        })
        .sum();
    IntervalScore {
        interval,
        loglik,
        records: records.len(),
        clamped,
    }
}

/// `(1/T) Σ_t (X(t) − I₀(t)) / |I₀(t)|` over aligned `(interval, value)`
/// series.
pub fn improvement_metric(x: &[(u32, f64)], baseline: &[(u32, f64)]) -> Result<f64> {
    if x.len() != baseline.len() {
        return Err(Error::Misaligned(format!(
            "{} target intervals vs {} baseline intervals",
            x.len(),
            baseline.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::Misaligned("no intervals to compare".into()));
    }
    let mut total = 0.0;
    for (&(t, xt), &(tb, it)) in x.iter().zip(baseline) {
        if t != tb {
            return Err(Error::Misaligned(format!("interval {t} paired with {tb}")));
        }
        if it == 0.0 {
            return Err(Error::ZeroBaseline(t));
        }
        total += (xt - it) / it.abs();
    }
    Ok(total / x.len() as f64)
}

/// Improvement over the intervals whose test sets are non-empty.
pub fn improvement_of_scores(x: &[IntervalScore], baseline: &[IntervalScore]) -> Result<f64> {
    let keep = |s: &[IntervalScore]| -> Vec<(u32, f64)> {
        s.iter()
            .filter(|c| !c.is_empty())
            .map(|c| (c.interval, c.loglik))
            .collect()
    };
    improvement_metric(&keep(x), &keep(baseline))
}

/// Mean log-likelihood over non-empty intervals; `None` if all are empty.
pub fn mean_loglik(scores: &[IntervalScore]) -> Option<f64> {
    let kept: Vec<f64> = scores.iter().filter(|s| !s.is_empty()).map(|s| s.loglik).collect();
    (!kept.is_empty()).then(|| kept.iter().sum::<f64>() / kept.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub algorithm: String,
    pub seed: u64,
    /// Fully resolved configuration as flat key-value pairs.
    pub config: BTreeMap<String, String>,
    /// Grid cells evaluated before this run was selected, if any.
    pub grid: Vec<BTreeMap<String, String>>,
    pub first_interval: u32,
    /// History discards performed by the target run (summed over particles).
    pub discards: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub per_interval: Vec<IntervalScore>,
    pub baseline_per_interval: Vec<IntervalScore>,
    pub validation_per_interval: Vec<IntervalScore>,
    /// `None` when no interval has a non-empty test set.
    pub improvement: Option<f64>,
    pub metadata: RunMetadata,
}

impl EvalReport {
    pub fn new(
        per_interval: Vec<IntervalScore>,
        baseline_per_interval: Vec<IntervalScore>,
        validation_per_interval: Vec<IntervalScore>,
        metadata: RunMetadata,
    ) -> Result<Self> {
        let domain = |s: &[IntervalScore]| s.iter().map(|c| c.interval).collect::<Vec<_>>();
        if domain(&per_interval) != domain(&baseline_per_interval) {
            return Err(Error::Misaligned("target and baseline cover different intervals".into()));
        }
        let improvement = if per_interval.iter().all(IntervalScore::is_empty) {
            None
        } else {
            Some(improvement_of_scores(&per_interval, &baseline_per_interval)?)
        };
        Ok(Self {
            schema_version: REPORT_SCHEMA_VERSION,
            per_interval,
            baseline_per_interval,
            validation_per_interval,
            improvement,
            metadata,
        })
    }

    pub fn clamp_events(&self) -> usize {
        self.per_interval
            .iter()
            .chain(&self.baseline_per_interval)
            .chain(&self.validation_per_interval)
            .map(|s| s.clamped)
            .sum()
    }

    pub fn empty_intervals(&self) -> Vec<u32> {
        self.per_interval
            .iter()
            .filter(|s| s.is_empty())
            .map(|s| s.interval)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("interval,test_loglik,baseline_loglik,rate_of_increase\n");
        for (x, b) in self.per_interval.iter().zip(&self.baseline_per_interval) {
            let rate = if b.loglik != 0.0 {
                ((x.loglik - b.loglik) / b.loglik.abs()).to_string()
            } else {
                String::new()
            };
            let _ = writeln!(out, "{},{},{},{}", x.interval, x.loglik, b.loglik, rate);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    /// `<path>.csv` and `<path>.json` side by side.
    Both,
}

/// Writes the report; returns the files written.
pub fn emit_report(report: &EvalReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<Vec<PathBuf>> {
    let path = path.as_ref();
    let targets = match format {
        ReportFormat::Csv => vec![(path.to_path_buf(), report.to_csv())],
        ReportFormat::Json => vec![(path.to_path_buf(), report.to_json())],
        ReportFormat::Both => vec![
            (path.with_extension("csv"), report.to_csv()),
            (path.with_extension("json"), report.to_json()),
        ],
    };
    for (p, text) in &targets {
        fs::write(p, text).map_err(|e| Error::io(p, e))?;
    }
    Ok(targets.into_iter().map(|(p, _)| p).collect())
}

pub fn read_report_json(path: impl AsRef<Path>) -> Result<EvalReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}
