//! Versioned CSV trace files with a JSON summary sidecar.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a trace
//! back reproduces every value bit for bit. Vectors are `;`-joined.

use std::fs;
use std::path::{Path, PathBuf};

use inexact_core::channel::TraceRow;
use inexact_core::oracles::Flag;
use inexact_core::Vector;

use crate::error::{io_err, HarnessError, Result};
use crate::experiment::{Experiment, Summary};

pub const TRACE_MAGIC: &str = "# inexact-trace v1";

pub const TRACE_COLUMNS: [&str; 14] = [
    "t",
    "x",
    "raw_value",
    "raw_grad",
    "value",
    "grad",
    "shift",
    "raw_flag",
    "raw_normal",
    "flag",
    "normal",
    "exact_value",
    "best_gap",
    "mc_stderr",
];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn fmt_vector(v: &Vector) -> String {
    v.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(";")
}

fn fmt_flag(f: Flag) -> &'static str {
    match f {
        Flag::Feasible => "feasible",
        Flag::Infeasible => "infeasible",
    }
}

/// The CSV fields of a row, in column order.
pub fn row_fields(r: &TraceRow) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    vec![
        r.t.to_string(),
        fmt_vector(&r.x),
        fmt_f64(r.raw_value),
        fmt_vector(&r.raw_grad),
        fmt_f64(r.value),
        fmt_vector(&r.grad),
        fmt_f64(r.shift),
        r.raw_flag.map(fmt_flag).unwrap_or_default().into(),
        r.raw_normal.as_ref().map(fmt_vector).unwrap_or_default(),
        r.flag.map(fmt_flag).unwrap_or_default().into(),
        r.normal.as_ref().map(fmt_vector).unwrap_or_default(),
        fmt_f64(r.exact_value),
        opt(r.best_gap),
        opt(r.mc_stderr),
    ]
}

fn schema(msg: impl Into<String>) -> HarnessError {
    HarnessError::Schema(msg.into())
}

fn parse_f64(s: &str, col: &str) -> Result<f64> {
    s.parse().map_err(|_| schema(format!("column {col}: `{s}` is not a number")))
}

fn parse_vector(s: &str, col: &str) -> Result<Vector> {
    if s.is_empty() {
        return Err(schema(format!("column {col}: empty vector")));
    }
    s.split(';').map(|c| parse_f64(c, col)).collect::<Result<Vec<_>>>().map(Vector::new)
}

fn parse_flag(s: &str, col: &str) -> Result<Option<Flag>> {
    match s {
        "" => Ok(None),
        "feasible" => Ok(Some(Flag::Feasible)),
        "infeasible" => Ok(Some(Flag::Infeasible)),
        _ => Err(schema(format!("column {col}: unknown flag `{s}`"))),
    }
}

fn opt<T>(s: &str, f: impl FnOnce(&str) -> Result<T>) -> Result<Option<T>> {
    if s.is_empty() { Ok(None) } else { f(s).map(Some) }
}

fn parse_row(rec: &csv::StringRecord) -> Result<TraceRow> {
    if rec.len() != TRACE_COLUMNS.len() {
        return Err(schema(format!("expected {} fields, found {}", TRACE_COLUMNS.len(), rec.len())));
    }
    let f = |i: usize| &rec[i];
    let c = |i: usize| TRACE_COLUMNS[i];
    Ok(TraceRow {
        t: f(0).parse().map_err(|_| schema(format!("column t: `{}`", f(0))))?,
        x: parse_vector(f(1), c(1))?,
        raw_value: parse_f64(f(2), c(2))?,
        raw_grad: parse_vector(f(3), c(3))?,
        value: parse_f64(f(4), c(4))?,
        grad: parse_vector(f(5), c(5))?,
        shift: parse_f64(f(6), c(6))?,
        raw_flag: parse_flag(f(7), c(7))?,
        raw_normal: opt(f(8), |s| parse_vector(s, c(8)))?,
        flag: parse_flag(f(9), c(9))?,
        normal: opt(f(10), |s| parse_vector(s, c(10)))?,
        exact_value: parse_f64(f(11), c(11))?,
        best_gap: opt(f(12), |s| parse_f64(s, c(12)))?,
        mc_stderr: opt(f(13), |s| parse_f64(s, c(13)))?,
    })
}

/// A trace as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceFile {
    pub config_hash: String,
    pub rows: Vec<TraceRow>,
}

pub fn trace_to_string(config_hash: &str, rows: &[TraceRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_COLUMNS)?;
    for r in rows {
        w.write_record(row_fields(r))?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| schema(e.to_string()))?).expect("csv is utf-8");
    Ok(format!("{TRACE_MAGIC} config={config_hash}\n{body}"))
}

pub fn trace_from_str(text: &str) -> Result<TraceFile> {
    let (first, body) = text.split_once('\n').ok_or_else(|| schema("empty trace file"))?;
    let hash = first
        .strip_prefix(TRACE_MAGIC)
        .and_then(|rest| rest.trim().strip_prefix("config="))
        .ok_or_else(|| schema(format!("missing `{TRACE_MAGIC} config=…` header")))?;
    let mut rd = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let header = rd.headers()?.clone();
    if header.iter().ne(TRACE_COLUMNS) {
        return Err(schema("trace columns do not match the v1 layout"));
    }
    let rows = rd
        .records()
        .map(|r| parse_row(&r?))
        .collect::<Result<Vec<_>>>()?;
    Ok(TraceFile {
        config_hash: hash.to_string(),
        rows,
    })
}

pub fn read_trace(path: &Path) -> Result<TraceFile> {
    trace_from_str(&fs::read_to_string(path).map_err(io_err(path))?)
}

pub fn summary_path(trace: &Path) -> PathBuf {
    trace.with_extension("json")
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    Ok(serde_json::from_str(&fs::read_to_string(path).map_err(io_err(path))?)?)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

/// Writes the trace CSV and its summary sidecar.
pub fn write_experiment(path: &Path, exp: &Experiment) -> Result<()> {
    write_file(path, &trace_to_string(&exp.summary.config_hash, &exp.trace.rows)?)?;
    write_file(&summary_path(path), &serde_json::to_string_pretty(&exp.summary)?)
}
