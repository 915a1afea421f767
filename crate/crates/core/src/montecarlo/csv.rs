//! Plot-ready CSV table of per-state mean errors.
//!
//! Columns: `state_id,bloch_x,bloch_y,bloch_z,r_sq,N,estimator,beta,metric,
//! mean_error,n_finite,n_infinite`. Reals are written with 17 significant
//! digits (round-trip exact), infinities as `inf`.

use std::fmt::Write as _;

use super::sweep::{EstimatorKind, MetricKind, SweepReport};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str =
    "state_id,bloch_x,bloch_y,bloch_z,r_sq,N,estimator,beta,metric,mean_error,n_finite,n_infinite";

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub state_id: u64,
    pub bloch: [f64; 3],
    pub r_sq: f64,
    pub shots_per_basis: u64,
    pub estimator: EstimatorKind,
    pub beta: f64,
    pub metric: MetricKind,
    pub mean_error: f64,
    pub n_finite: usize,
    pub n_infinite: usize,
}

pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn parse_real(s: &str) -> Result<f64> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        _ => s
            .parse()
            .map_err(|_| Error::Parse(format!("invalid number `{s}`"))),
    }
}

pub fn report_rows(report: &SweepReport) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    for s in &report.states {
        for m in &s.means {
            rows.push(CsvRow {
                state_id: s.state_id,
                bloch: s.bloch.components(),
                r_sq: s.r_sq,
                shots_per_basis: report.config.shots_per_basis,
                estimator: m.estimator,
                beta: m.beta,
                metric: m.metric,
                mean_error: m.mean,
                n_finite: m.n_finite,
                n_infinite: m.n_infinite,
            });
        }
    }
    rows
}

pub fn format_csv(rows: &[CsvRow]) -> String {
    let mut out = String::with_capacity(160 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.state_id,
            format_real(r.bloch[0]),
            format_real(r.bloch[1]),
            format_real(r.bloch[2]),
            format_real(r.r_sq),
            r.shots_per_basis,
            r.estimator.as_str(),
            format_real(r.beta),
            r.metric.as_str(),
            format_real(r.mean_error),
            r.n_finite,
            r.n_infinite
        );
    }
    out
}

pub fn report_csv(report: &SweepReport) -> String {
    format_csv(&report_rows(report))
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        _ => return Err(Error::Parse("missing or unexpected CSV header".into())),
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let at = |msg: String| Error::Parse(format!("line {}: {msg}", k + 2));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 12 {
            return Err(at(format!("expected 12 fields, found {}", f.len())));
        }
        let int = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| at(format!("invalid integer `{s}`")))
        };
        let real = |s: &str| parse_real(s).map_err(|e| at(e.to_string()));
        rows.push(CsvRow {
            state_id: int(f[0])?,
            bloch: [real(f[1])?, real(f[2])?, real(f[3])?],
            r_sq: real(f[4])?,
            shots_per_basis: int(f[5])?,
            estimator: EstimatorKind::parse(f[6]).map_err(|e| at(e.to_string()))?,
            beta: real(f[7])?,
            metric: MetricKind::parse(f[8]).map_err(|e| at(e.to_string()))?,
            mean_error: real(f[9])?,
            n_finite: int(f[10])? as usize,
            n_infinite: int(f[11])? as usize,
        });
    }
    Ok(rows)
}
