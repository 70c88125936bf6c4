//! Machine-readable MSE reports: a delimited-text table with fixed column
//! order plus a JSON metadata sidecar.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ofdm::{ModulationKind, Snr};

/// One (estimator, condition) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MseRow {
    pub estimator: String,
    pub snr: Snr,
    pub pilots: usize,
    pub modulation: ModulationKind,
    pub mse: f64,
    pub samples: usize,
}

/// Rows plus the metadata that lands in the sidecar.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MseReport {
    pub rows: Vec<MseRow>,
}

/// Sidecar payload: anything the caller wants to pin alongside the table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportMeta {
    pub description: String,
    pub config: crate::harness::config::ExperimentConfig,
}

pub const REPORT_HEADER: &str = "estimator,snr_db,pilots,modulation,mse,samples";

impl MseReport {
    pub fn new(mut rows: Vec<MseRow>) -> Self {
        sort_rows(&mut rows);
        MseReport { rows }
    }

    pub fn push(&mut self, row: MseRow) {
        self.rows.push(row);
        sort_rows(&mut self.rows);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = MseRow>) {
        self.rows.extend(rows);
        sort_rows(&mut self.rows);
    }

    /// Look up one cell.
    pub fn mse(&self, estimator: &str, snr: Snr) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator && r.snr == snr)
            .map(|r| r.mse)
    }

    /// Render the delimited table.
    pub fn to_table(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.estimator, r.snr, r.pilots, r.modulation, r.mse, r.samples
            );
        }
        out
    }
}

fn sort_rows(rows: &mut [MseRow]) {
    rows.sort_by(|a, b| {
        a.estimator
            .cmp(&b.estimator)
            .then_with(|| snr_key(a.snr).partial_cmp(&snr_key(b.snr)).unwrap())
            .then_with(|| a.pilots.cmp(&b.pilots))
    });
}

fn snr_key(snr: Snr) -> f64 {
    match snr {
        Snr::Db(db) => db,
        Snr::Infinite => f64::INFINITY,
    }
}

/// 10 log10(mse), the dB axis used by the figures.
pub fn mse_db(mse: f64) -> f64 {
    10.0 * mse.log10()
}

/// Write the table and a `<path>.meta.json` sidecar.
pub fn emit_report(report: &MseReport, path: &Path, meta: Option<&ReportMeta>) -> Result<()> {
    std::fs::write(path, report.to_table()).map_err(|e| Error::io(path, e))?;
    if let Some(meta) = meta {
        let sidecar = meta_path(path);
        let json = serde_json::to_string_pretty(meta)
            .map_err(|e| Error::format(&sidecar, e.to_string()))?;
        std::fs::write(&sidecar, json).map_err(|e| Error::io(&sidecar, e))?;
    }
    Ok(())
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".meta.json");
    PathBuf::from(os)
}

/// Parse a table written by [`emit_report`].
pub fn load_report(path: &Path) -> Result<MseReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == REPORT_HEADER => {}
        other => {
            return Err(Error::format(
                path,
                format!("unexpected header {other:?}"),
            ))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::format(path, format!("bad row {}: {line}", idx + 2)));
        }
        let parse_err = |what: &str| Error::format(path, format!("bad {what} in row {}", idx + 2));
        let snr = if fields[1] == "inf" {
            Snr::Infinite
        } else {
            Snr::Db(fields[1].parse().map_err(|_| parse_err("snr"))?)
        };
        let modulation = match fields[3] {
            "qpsk" => ModulationKind::Qpsk,
            "16qam" => ModulationKind::Qam16,
            _ => return Err(parse_err("modulation")),
        };
        rows.push(MseRow {
            estimator: fields[0].to_string(),
            snr,
            pilots: fields[2].parse().map_err(|_| parse_err("pilots"))?,
            modulation,
            mse: fields[4].parse().map_err(|_| parse_err("mse"))?,
            samples: fields[5].parse().map_err(|_| parse_err("samples"))?,
        });
    }
    Ok(MseReport::new(rows))
}
