//! Run artifacts: `results.csv`, `report.json`, `manifest.json`, `FAILED`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::Experiment;
use crate::experiments::{Outcome, Table};
use crate::CliError;

pub const REPORT_SCHEMA: &str = "multispec-report/1";
pub const MANIFEST_SCHEMA: &str = "multispec-manifest/1";
pub const FAILURE_MARKER: &str = "FAILED";

#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub schema: &'static str,
    pub experiment: Experiment,
    pub model_exponent: f64,
    pub measured_exponent: Option<f64>,
    pub residual: Option<f64>,
    /// `null` when no finer companion could be evaluated.
    pub precision_estimate: Option<f64>,
    pub exponent_precision: Option<f64>,
    pub status: &'static str,
    pub details: &'a Value,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub multispec: &'static str,
    #[serde(rename = "multispec-cli")]
    pub cli: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema: &'static str,
    pub versions: Versions,
    pub experiment: Experiment,
    pub parameters: Value,
    pub seed: u64,
    pub workers: usize,
    pub fine: bool,
    pub wall_time_s: f64,
    pub status: &'static str,
    pub error: Option<String>,
    pub files: Vec<&'static str>,
}

impl Versions {
    pub fn current() -> Self {
        Versions { multispec: multispec::VERSION, cli: env!("CARGO_PKG_VERSION") }
    }
}

/// `<out>/<experiment>-seed<seed>`, with a `-fine` suffix for refined runs.
pub fn run_dir(out: &Path, experiment: Experiment, seed: u64, fine: bool) -> PathBuf {
    let suffix = if fine { "-fine" } else { "" };
    out.join(format!("{experiment}-seed{seed}{suffix}"))
}

pub fn status(outcome: &Outcome) -> &'static str {
    if outcome.failure.is_some() {
        "failed"
    } else if outcome.under_resolved {
        "under-resolved"
    } else {
        "ok"
    }
}

pub fn write_csv(path: &Path, table: &Table) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Writes every artifact for a finished (possibly failed) run.
pub fn write_outcome(dir: &Path, experiment: Experiment, outcome: &Outcome, manifest: &Manifest) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let marker = dir.join(FAILURE_MARKER);
    if marker.exists() {
        fs::remove_file(&marker)?;
    }
    write_csv(&dir.join("results.csv"), &outcome.table)?;
    let report = Report {
        schema: REPORT_SCHEMA,
        experiment,
        model_exponent: outcome.model_exponent,
        measured_exponent: outcome.measured_exponent.and_then(finite),
        residual: outcome.residual.and_then(finite),
        precision_estimate: finite(outcome.precision_estimate),
        exponent_precision: outcome.exponent_precision.and_then(finite),
        status: status(outcome),
        details: &outcome.details,
    };
    write_json(&dir.join("report.json"), &report)?;
    write_json(&dir.join("manifest.json"), manifest)?;
    if let Some(e) = &outcome.failure {
        fs::write(marker, format!("{e}\n"))?;
    }
    Ok(())
}

/// Records a run that produced no results.
pub fn write_failure(dir: &Path, manifest: &Manifest, error: &CliError) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("manifest.json"), manifest)?;
    fs::write(dir.join(FAILURE_MARKER), format!("{error}\n"))?;
    Ok(())
}
