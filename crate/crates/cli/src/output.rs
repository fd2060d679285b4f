//! Deterministic JSON/CSV rendering and atomic file writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use qpse_core::dynamics::SeriesRow;
use qpse_core::entropy::{bbm_bound, EntropyReport};
use qpse_core::grid::GridSpec;
use serde_json::{json, Map, Value};

pub const CSV_HEADER: &str = "t,s_r,s_k,s_total,bbm_margin,norm_residual";

/// Rounds to `digits` significant digits via decimal formatting, so the
/// written value does not depend on how the float was produced.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

pub fn number(x: f64, digits: usize) -> Value {
    let r = round_sig(x, digits);
    // -0.0 would otherwise print as "-0.0".
    let r = if r == 0.0 { 0.0 } else { r };
    serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
}

pub fn report_json(r: &EntropyReport, digits: usize) -> Value {
    json!({
        "dim": r.dim,
        "s_r": number(r.s_r, digits),
        "s_k": number(r.s_k, digits),
        "s_spin": number(r.s_spin, digits),
        "s_total": number(r.s_total, digits),
        "bbm_bound": number(bbm_bound(r.dim), digits),
        "bbm_margin": number(r.bbm_margin, digits),
        "norm_residual_r": number(r.norm_residual_r, digits),
        "norm_residual_k": number(r.norm_residual_k, digits),
    })
}

pub fn grid_json(g: &GridSpec, digits: usize) -> Value {
    json!({
        "dim": g.dim(),
        "points": g.shape(),
        "spacing": g.axes().iter().map(|a| number(a.spacing, digits)).collect::<Vec<_>>(),
        "origin": g.axes().iter().map(|a| number(a.origin, digits)).collect::<Vec<_>>(),
    })
}

pub fn row_json(row: &SeriesRow, digits: usize) -> Value {
    json!({
        "t": number(row.time, digits),
        "s_r": number(row.report.s_r, digits),
        "s_k": number(row.report.s_k, digits),
        "s_total": number(row.report.s_total, digits),
        "bbm_margin": number(row.report.bbm_margin, digits),
        "norm_residual": number(row.norm_residual, digits),
    })
}

fn csv_field(x: f64, digits: usize) -> String {
    let r = round_sig(x, digits);
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{:.*e}", digits - 1, r)
}

pub fn series_csv(rows: &[SeriesRow], digits: usize) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let fields = [
            row.time,
            row.report.s_r,
            row.report.s_k,
            row.report.s_total,
            row.report.bbm_margin,
            row.norm_residual,
        ];
        let line: Vec<String> = fields.iter().map(|&x| csv_field(x, digits)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn to_pretty(map: Map<String, Value>) -> String {
    let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("serializable");
    s.push('\n');
    s
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(&path).map_err(|e| e.error)?;
    Ok(path)
}
