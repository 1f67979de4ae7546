//! Result records and their CSV and JSON encodings.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use qnet_core::finite_key::KeyRateReport;
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub pair: String,
    pub session: Option<u32>,
    pub loss_db: Option<f64>,
    #[serde(flatten)]
    pub report: KeyRateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSummary {
    pub pairs: usize,
    pub mean_rate_per_pulse: f64,
    pub mean_rate_bps: f64,
    pub min_rate_bps: f64,
    pub max_rate_bps: f64,
}

impl NetworkSummary {
    pub fn of(reports: &[PairReport]) -> NetworkSummary {
        let n = reports.len().max(1) as f64;
        let bps = reports.iter().map(|r| r.report.rate_bps);
        NetworkSummary {
            pairs: reports.len(),
            mean_rate_per_pulse: reports.iter().map(|r| r.report.rate_per_pulse).sum::<f64>() / n,
            mean_rate_bps: bps.clone().sum::<f64>() / n,
            min_rate_bps: bps.clone().fold(f64::INFINITY, f64::min),
            max_rate_bps: bps.fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Header and rows of a CSV table.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Table {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let io = |e: std::io::Error| CliError::io(path, e);
        let mut w = csv::Writer::from_writer(create(path)?);
        w.write_record(&self.header).map_err(|e| io(e.into()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| io(e.into()))?;
        }
        w.flush().map_err(io)
    }
}

pub fn report_table(reports: &[PairReport]) -> Table {
    let mut t = Table::new(&[
        "pair",
        "session",
        "loss_db",
        "s11_lower",
        "e11ph_upper",
        "s_zz",
        "e_zz",
        "f",
        "z",
        "p_z",
        "clock_hz",
        "rate_per_pulse",
        "rate_bps",
        "epsilon",
        "h_low",
        "h_high",
        "h_min",
        "lp_evaluations",
    ]);
    for p in reports {
        let r = &p.report;
        t.push(vec![
            p.pair.clone(),
            p.session.map(|s| s.to_string()).unwrap_or_default(),
            opt_num(p.loss_db),
            num(r.s11_lower),
            num(r.e11ph_upper),
            num(r.s_zz),
            num(r.e_zz),
            num(r.f),
            num(r.z),
            num(r.p_z),
            num(r.clock_hz),
            num(r.rate_per_pulse),
            num(r.rate_bps),
            opt_num(r.epsilon),
            opt_num(r.h_low),
            opt_num(r.h_high),
            opt_num(r.h_min),
            r.lp_evaluations.map(|n| n.to_string()).unwrap_or_default(),
        ]);
    }
    t
}

pub fn summary_table(s: &NetworkSummary) -> Table {
    let mut t = Table::new(&["pairs", "mean_rate_per_pulse", "mean_rate_bps", "min_rate_bps", "max_rate_bps"]);
    t.push(vec![
        s.pairs.to_string(),
        num(s.mean_rate_per_pulse),
        num(s.mean_rate_bps),
        num(s.min_rate_bps),
        num(s.max_rate_bps),
    ]);
    t
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path, e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
