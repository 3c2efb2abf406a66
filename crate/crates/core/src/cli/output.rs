//! Diagnostics CSV and final-state JSON writers. Every number is written with
//! 17 significant digits so files round-trip losslessly.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::value::RawValue;

use crate::diagnostics::DiagRow;

pub const CSV_HEADER: &str = "t,energy_A,h_q_norm,min_ux,min_phix,m_l2,dq_from_start,apriori_residual,chain_rule_residual";

pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn cell(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

pub fn csv_line(row: &DiagRow) -> String {
    [
        cell(Some(row.t)),
        cell(Some(row.energy_a)),
        cell(Some(row.h_q_norm)),
        cell(Some(row.min_ux)),
        cell(row.min_phix),
        cell(Some(row.m_l2)),
        cell(row.dq_from_start),
        cell(row.apriori_residual),
        cell(row.chain_rule_residual),
    ]
    .join(",")
}

pub fn write_csv(path: &Path, rows: &[DiagRow]) -> io::Result<()> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", csv_line(row))?;
    }
    out.flush()
}

/// A JSON number with 17 significant digits; non-finite values become `null`.
pub fn json_number(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() {
        format_number(x)
    } else {
        "null".to_string()
    };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

pub fn json_numbers(xs: &[f64]) -> Vec<Box<RawValue>> {
    xs.iter().map(|&x| json_number(x)).collect()
}

#[derive(Serialize)]
pub struct FinalState {
    pub label: String,
    pub frame: &'static str,
    pub symbol: String,
    pub n: usize,
    pub status: &'static str,
    pub t: Box<RawValue>,
    pub stop_time: Option<Box<RawValue>>,
    pub x: Vec<Box<RawValue>>,
    pub u: Vec<Box<RawValue>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_displacement: Option<Vec<Box<RawValue>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<Box<RawValue>>>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}
