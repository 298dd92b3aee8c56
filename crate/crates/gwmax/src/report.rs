//! CSV and JSON reports.

use std::io::Write;

use gwmax_core::convergence::{Report, Row};
use gwmax_core::TailReport;
use serde::Serialize;

use crate::CliError;

/// Columns of the `maxdeg` report.
pub const TAIL_COLUMNS: [&str; 7] = ["n", "p_n", "q_n", "ratio", "H_n_n", "nFbar", "residual"];
/// Columns of the `verify` report.
pub const VERIFY_COLUMNS: [&str; 9] = ["probe_id", "n", "method", "estimate", "ci_low", "ci_high", "limit", "gap", "verdict"];
/// Written in place of `q_n` when it is below the precision floor.
pub const BELOW_FLOOR: &str = "below-floor";

/// Shortest round-trip form, switching to exponent notation outside
/// `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

pub fn write_tail_csv<W: Write>(report: &TailReport, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TAIL_COLUMNS).map_err(csv_error)?;
    for r in &report.rows {
        let q = match r.q_n {
            Some(q) => num(q),
            None => BELOW_FLOOR.to_string(),
        };
        w.write_record([r.n.to_string(), num(r.p_n), q, opt(r.ratio), num(r.h_n_n), num(r.n_fbar), num(r.residual)])
            .map_err(csv_error)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

fn row_record(r: &Row) -> [String; 9] {
    [
        r.probe_id.clone(),
        r.n.to_string(),
        r.method.as_str().to_string(),
        opt(r.estimate),
        opt(r.ci.map(|c| c.0)),
        opt(r.ci.map(|c| c.1)),
        num(r.limit),
        opt(r.gap),
        r.verdict.as_str().to_string(),
    ]
}

/// One line per row under the fixed header; an empty report is header only.
pub fn write_verify_csv<W: Write>(report: &Report, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VERIFY_COLUMNS).map_err(csv_error)?;
    for r in &report.rows {
        w.write_record(row_record(r)).map_err(csv_error)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Serialize)]
struct JsonRow<'a> {
    probe_id: &'a str,
    n: u64,
    method: &'a str,
    estimate: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    limit: f64,
    gap: Option<f64>,
    verdict: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

#[derive(Serialize)]
struct JsonProbe<'a> {
    probe_id: &'a str,
    verdict: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    regime: &'a str,
    law: &'a str,
    rows: Vec<JsonRow<'a>>,
    probes: Vec<JsonProbe<'a>>,
    verdict: &'a str,
}

pub fn verify_json(report: &Report) -> serde_json::Value {
    let doc = JsonReport {
        regime: report.regime.as_str(),
        law: &report.law,
        rows: report
            .rows
            .iter()
            .map(|r| JsonRow {
                probe_id: &r.probe_id,
                n: r.n,
                method: r.method.as_str(),
                estimate: r.estimate,
                ci_low: r.ci.map(|c| c.0),
                ci_high: r.ci.map(|c| c.1),
                limit: r.limit,
                gap: r.gap,
                verdict: r.verdict.as_str(),
                note: r.note.as_deref(),
            })
            .collect(),
        probes: report
            .probes
            .iter()
            .map(|p| JsonProbe { probe_id: &p.probe_id, verdict: p.verdict.as_str(), note: p.note.as_deref() })
            .collect(),
        verdict: report.verdict.as_str(),
    };
    serde_json::to_value(doc).expect("report serialises")
}

pub fn write_verify_json<W: Write>(report: &Report, mut out: W) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&verify_json(report)).expect("report serialises");
    writeln!(out, "{text}").map_err(|e| CliError::Io(e.to_string()))
}

/// Per-probe verdicts and the overall verdict, one line each.
pub fn write_summary<W: Write>(report: &Report, mut out: W) -> std::io::Result<()> {
    for p in &report.probes {
        match &p.note {
            Some(note) => writeln!(out, "{}\t{}\t{}", p.verdict.as_str(), p.probe_id, note)?,
            None => writeln!(out, "{}\t{}", p.verdict.as_str(), p.probe_id)?,
        }
    }
    writeln!(out, "verdict: {}", report.verdict.as_str())
}
