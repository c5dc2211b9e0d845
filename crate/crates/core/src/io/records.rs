//! Surrogate record files.
//!
//! CSV header: `model,benchmark,budget_s,data_frac,nrmse_avg,nrmse_worst,c_inf_s`.
//! The JSON form is an array of objects with the same keys.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::breakeven::SurrogateRecord;
use crate::error::{Error, Result};
use crate::io::fmt_f64;

pub const RECORD_HEADER: [&str; 7] = [
    "model",
    "benchmark",
    "budget_s",
    "data_frac",
    "nrmse_avg",
    "nrmse_worst",
    "c_inf_s",
];

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordRow {
    model: String,
    benchmark: String,
    budget_s: f64,
    data_frac: f64,
    nrmse_avg: f64,
    nrmse_worst: f64,
    c_inf_s: f64,
}

impl From<RecordRow> for SurrogateRecord {
    fn from(r: RecordRow) -> Self {
        SurrogateRecord {
            model: r.model.trim().to_string(),
            benchmark: r.benchmark.trim().to_string(),
            budget: r.budget_s,
            data_fraction: r.data_frac,
            eps_avg: r.nrmse_avg,
            eps_worst: r.nrmse_worst,
            c_inf: r.c_inf_s,
        }
    }
}

impl From<&SurrogateRecord> for RecordRow {
    fn from(r: &SurrogateRecord) -> Self {
        RecordRow {
            model: r.model.clone(),
            benchmark: r.benchmark.clone(),
            budget_s: r.budget,
            data_frac: r.data_fraction,
            nrmse_avg: r.eps_avg,
            nrmse_worst: r.eps_worst,
            c_inf_s: r.c_inf,
        }
    }
}

fn record_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Record {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Validate rows and reject duplicate `(model, benchmark, budget)` keys.
fn check_rows(path: &Path, rows: Vec<(u64, RecordRow)>) -> Result<Vec<SurrogateRecord>> {
    let mut seen: HashMap<(String, String, u64), u64> = HashMap::new();
    let mut out = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        let record = SurrogateRecord::from(row);
        record
            .validate()
            .map_err(|e| record_error(path, line, e.to_string()))?;
        let key = (record.model.clone(), record.benchmark.clone(), record.budget.to_bits());
        if let Some(first) = seen.insert(key, line) {
            return Err(record_error(
                path,
                line,
                format!(
                    "duplicate key (model {}, benchmark {}, budget {}) also on line {first}",
                    record.model, record.benchmark, record.budget
                ),
            ));
        }
        out.push(record);
    }
    Ok(out)
}

pub fn parse_records_csv(text: &str, path: &Path) -> Result<Vec<SurrogateRecord>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().ne(RECORD_HEADER) {
        return Err(record_error(
            path,
            1,
            format!("header must be `{}`", RECORD_HEADER.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for result in reader.records() {
        let rec = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            record_error(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: RecordRow = rec
            .deserialize(Some(&headers))
            .map_err(|e| record_error(path, line, e.to_string()))?;
        rows.push((line, row));
    }
    check_rows(path, rows)
}

pub fn parse_records_json(text: &str, path: &Path) -> Result<Vec<SurrogateRecord>> {
    let entries: Vec<&RawValue> =
        serde_json::from_str(text).map_err(|e| record_error(path, e.line() as u64, e.to_string()))?;
    let base = text.as_ptr() as usize;
    let mut rows = Vec::with_capacity(entries.len());
    for raw in entries {
        // Raw values borrow from `text`, so their offset gives the line.
        let offset = raw.get().as_ptr() as usize - base;
        let line = text[..offset].matches('\n').count() as u64 + 1;
        let row: RecordRow = serde_json::from_str(raw.get()).map_err(|e| record_error(path, line, e.to_string()))?;
        rows.push((line, row));
    }
    check_rows(path, rows)
}

/// Load a record file; `.json` files use the JSON form, anything else CSV.
pub fn load_records(path: &Path) -> Result<Vec<SurrogateRecord>> {
    let text = fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        parse_records_json(&text, path)
    } else {
        parse_records_csv(&text, path)
    }
}

pub fn records_csv(records: &[SurrogateRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.model.clone(),
            r.benchmark.clone(),
            fmt_f64(r.budget),
            fmt_f64(r.data_fraction),
            fmt_f64(r.eps_avg),
            fmt_f64(r.eps_worst),
            fmt_f64(r.c_inf),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn records_json(records: &[SurrogateRecord]) -> Result<String> {
    let rows: Vec<RecordRow> = records.iter().map(RecordRow::from).collect();
    Ok(serde_json::to_string_pretty(&rows)? + "\n")
}
