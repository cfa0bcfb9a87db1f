//! Report files.
//!
//! The JSON report:
//!
//! ```text
//! {
//!   "format": "informer-options-report",
//!   "version": 1,
//!   "reports": [
//!     {"model": "Informer", "mae": 1.2, "rmse": 1.7, "direction_accuracy_pct": 55.0,
//!      "final_day_mae": 2.1, "net_value": 1.3, "n_sequences": 329},
//!     ...
//!   ]
//! }
//! ```
//!
//! The predictions CSV has one row per model, sequence and horizon step with
//! the columns of [`PREDICTIONS_HEADER`]; `date` is the target date and
//! `horizon_step` counts from 1.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Backtest, MetricsReport};
use crate::error::{Error, Result};

pub const REPORT_FORMAT: &str = "informer-options-report";
pub const REPORT_VERSION: u32 = 1;
pub const PREDICTIONS_HEADER: [&str; 6] = ["contract_id", "date", "horizon_step", "actual", "predicted", "model"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub format: String,
    pub version: u32,
    pub reports: Vec<MetricsReport>,
}

impl ReportFile {
    pub fn new(reports: Vec<MetricsReport>) -> Self {
        Self { format: REPORT_FORMAT.into(), version: REPORT_VERSION, reports }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text)?;
        if r.format != REPORT_FORMAT || r.version != REPORT_VERSION {
            return Err(Error::invalid(format!("unsupported report {} v{}", r.format, r.version)));
        }
        Ok(r)
    }
}

pub fn emit_report(reports: &[MetricsReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = ReportFile::new(reports.to_vec()).to_json()?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<ReportFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ReportFile::from_json(&text)
}

/// Write every forecast of every run.
pub fn write_predictions<W: Write>(runs: &[Backtest], out: W) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(out);
    writeln!(w, "{}", PREDICTIONS_HEADER.join(","))?;
    for run in runs {
        for (s, p) in run.samples.iter().zip(&run.predictions) {
            for (h, ((date, actual), predicted)) in s.target_dates.iter().zip(&s.target_raw).zip(p).enumerate() {
                writeln!(w, "{},{date},{},{actual},{predicted},{}", s.contract_id, h + 1, run.report.model)?;
            }
        }
    }
    w.flush()
}

pub fn emit_predictions_csv(runs: &[Backtest], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_predictions(runs, file).map_err(|e| Error::io(path, e))
}
