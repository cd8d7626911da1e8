use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = concat!("cbp ", env!("CARGO_PKG_VERSION"));

/// Process exit status. Ordered by precedence: when several apply, the
/// largest wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Violation,
    PrecisionFailure,
    InvalidInput,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Violation => 1,
            Outcome::PrecisionFailure => 2,
            Outcome::InvalidInput => 3,
        }
    }

    /// A failed check is a precision failure when its inputs carried
    /// truncation or refinement warnings, and a violation otherwise.
    pub fn of_check(pass: bool, warnings: bool) -> Self {
        match (pass, warnings) {
            (true, _) => Outcome::Pass,
            (false, true) => Outcome::PrecisionFailure,
            (false, false) => Outcome::Violation,
        }
    }

    pub fn worst(self, other: Outcome) -> Outcome {
        self.max(other)
    }
}

/// Content of a `.json` report. Everything here is a pure function of the
/// configuration and inputs.
#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub schema_version: u32,
    pub artifact_version: &'static str,
    pub command: &'a str,
    pub config: RunConfig,
    pub outcome: Outcome,
    pub exit_code: u8,
    pub result: &'a T,
}

impl<'a, T: Serialize> Report<'a, T> {
    pub fn new(command: &'a str, config: &RunConfig, outcome: Outcome, result: &'a T) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION,
            command,
            config: config.echo(),
            outcome,
            exit_code: outcome.code(),
            result,
        }
    }
}

/// Run metadata that changes between identical runs; kept out of the
/// report itself.
#[derive(Debug, Serialize)]
pub struct Meta<'a> {
    pub artifact_version: &'static str,
    pub command: &'a str,
    pub started_unix_ms: u128,
    pub elapsed_seconds: f64,
    pub threads: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<Budget>,
}

/// Wall-clock budget of the suite; reported, never enforced.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Budget {
    pub limit_seconds: f64,
    pub within: bool,
}

/// CSV summary rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip text of a float, so CSV output is reproducible.
/// Very small or large magnitudes use exponent notation.
pub fn num(v: f64) -> String {
    if v == 0.0 || !v.is_finite() || (1e-4..1e7).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone)]
pub struct Written {
    pub json: PathBuf,
    pub csv: PathBuf,
    pub meta: PathBuf,
}

pub fn unix_ms(t: SystemTime) -> u128 {
    t.duration_since(UNIX_EPOCH).unwrap_or(Duration::ZERO).as_millis()
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::write(path, e))
}

/// Writes `<stem>.json`, `<stem>.csv` and `<stem>.meta.json` into `dir`.
pub fn write_report<T: Serialize>(
    dir: &Path,
    stem: &str,
    report: &Report<'_, T>,
    table: &Table,
    meta: &Meta<'_>,
) -> CliResult<Written> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    let json = dir.join(format!("{stem}.json"));
    let csv_path = dir.join(format!("{stem}.csv"));
    let meta_path = dir.join(format!("{stem}.meta.json"));

    let mut text = serde_json::to_vec_pretty(report)?;
    text.push(b'\n');
    write_file(&json, &text)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::write(&csv_path, e.into_error()))?;
    write_file(&csv_path, &bytes)?;

    let mut text = serde_json::to_vec_pretty(meta)?;
    text.push(b'\n');
    write_file(&meta_path, &text)?;
    Ok(Written { json, csv: csv_path, meta: meta_path })
}
