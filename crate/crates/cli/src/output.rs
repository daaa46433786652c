//! CSV tables. Every table starts with a `schema_version` column and always
//! carries its header; numbers use fixed formats independent of the locale.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use irg_gkss::experiment::PowerSummary;

use crate::error::{CliError, CliResult};

pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const TEST_HEADER: &[&str] = &[
    "schema_version", "graph", "n", "edges", "method", "model", "kernel", "M", "B", "alpha", "seed", "statistic",
    "lower", "upper", "p_value", "reject",
];

pub const POWER_HEADER: &[&str] = &[
    "schema_version", "experiment", "setting", "method", "runs", "rejections", "rejection_rate", "band_lo",
    "band_hi", "skipped", "abandoned", "errors", "mean_max_degree",
];

pub const RECORD_HEADER: &[&str] = &[
    "schema_version", "experiment", "setting", "method", "repetition", "seed", "statistic", "p_value", "reject",
    "max_degree", "edges", "error",
];

/// Scientific notation with ten significant digits; empty for NaN.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.9e}")
    }
}

/// Fixed number of decimals; empty for NaN.
pub fn fixed(x: f64, decimals: usize) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.decimals$}")
    }
}

pub struct Table {
    writer: csv::Writer<Box<dyn Write>>,
}

impl Table {
    /// Write to `path`, or to standard output when it is `None`.
    pub fn create(path: Option<&Path>, header: &[&str]) -> CliResult<Self> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(
                File::create(p).map_err(|e| CliError::input(format!("cannot create {}: {e}", p.display())))?,
            ),
            None => Box::new(io::stdout()),
        };
        let mut table = Table { writer: csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink) };
        table.row(header.iter().map(|s| s.to_string()))?;
        Ok(table)
    }

    pub fn row(&mut self, fields: impl IntoIterator<Item = String>) -> CliResult<()> {
        self.writer.write_record(fields).map_err(|e| CliError::Runtime(format!("csv: {e}")))
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.writer.flush().map_err(|e| CliError::Runtime(format!("csv: {e}")))
    }
}

pub fn power_row(experiment: &str, s: &PowerSummary) -> Vec<String> {
    vec![
        CSV_SCHEMA_VERSION.to_string(),
        experiment.to_string(),
        s.setting.clone(),
        s.method.clone(),
        s.runs.to_string(),
        s.rejections.to_string(),
        fixed(s.rejection_rate, 4),
        fixed(s.band_lo, 4),
        fixed(s.band_hi, 4),
        s.skipped.to_string(),
        s.abandoned.to_string(),
        s.errors.to_string(),
        fixed(s.mean_max_degree, 4),
    ]
}

pub fn record_rows(experiment: &str, s: &PowerSummary) -> Vec<Vec<String>> {
    s.records
        .iter()
        .map(|r| {
            vec![
                CSV_SCHEMA_VERSION.to_string(),
                experiment.to_string(),
                s.setting.clone(),
                s.method.clone(),
                r.repetition.to_string(),
                r.seed.to_string(),
                sci(r.statistic),
                fixed(r.p_value, 5),
                u8::from(r.reject).to_string(),
                r.max_degree.to_string(),
                r.edges.to_string(),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect()
}
