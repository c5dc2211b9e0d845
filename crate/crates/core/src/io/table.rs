//! Breakeven result tables.
//!
//! Columns: `model,benchmark,budget_s,data_frac,nrmse_avg,nrmse_worst,nstar_avg,nstar_worst`,
//! optionally followed by `robustness_ratio`. Infinite breakeven values are
//! written `INF` and unmatched ones `unmatched`.

use std::path::Path;

use crate::breakeven::{BreakevenResult, NStar};
use crate::error::{Error, Result};
use crate::io::fmt_f64;

pub const TABLE_HEADER: [&str; 8] = [
    "model",
    "benchmark",
    "budget_s",
    "data_frac",
    "nrmse_avg",
    "nrmse_worst",
    "nstar_avg",
    "nstar_worst",
];
pub const RATIO_COLUMN: &str = "robustness_ratio";
pub const UNMATCHED: &str = "unmatched";

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub model: String,
    pub benchmark: String,
    pub budget: f64,
    pub data_fraction: f64,
    pub eps_avg: f64,
    pub eps_worst: f64,
    /// `None` when no ladder entry matched.
    pub n_star_avg: Option<NStar>,
    pub n_star_worst: Option<NStar>,
    pub robustness_ratio: Option<f64>,
}

impl TableRow {
    /// Row for a computed result; breakeven values are rounded to integers.
    pub fn from_result(r: &BreakevenResult) -> Self {
        let round = |n: Option<NStar>| {
            n.map(|n| match n {
                NStar::Finite(v) => NStar::Finite(v.round().max(1.0)),
                NStar::Infinite => NStar::Infinite,
            })
        };
        TableRow {
            model: r.record.model.clone(),
            benchmark: r.record.benchmark.clone(),
            budget: r.record.budget,
            data_fraction: r.record.data_fraction,
            eps_avg: r.record.eps_avg,
            eps_worst: r.record.eps_worst,
            n_star_avg: round(r.n_star_avg),
            n_star_worst: round(r.n_star_worst),
            robustness_ratio: r.robustness_ratio(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub with_ratio: bool,
    pub rows: Vec<TableRow>,
}

fn n_star_cell(n: Option<NStar>) -> String {
    match n {
        Some(n) => n.to_string(),
        None => UNMATCHED.into(),
    }
}

fn parse_n_star(cell: &str) -> Result<Option<NStar>> {
    if cell == UNMATCHED {
        Ok(None)
    } else {
        cell.parse().map(Some)
    }
}

fn parse_num(cell: &str, name: &str) -> Result<f64> {
    cell.parse::<f64>()
        .map_err(|_| Error::arg(format!("{name}: `{cell}` is not a number")))
}

pub fn parse_table(text: &str, path: &Path) -> Result<ResultTable> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let with_ratio = if headers.iter().eq(TABLE_HEADER) {
        false
    } else if headers.iter().eq(TABLE_HEADER.iter().copied().chain([RATIO_COLUMN])) {
        true
    } else {
        return Err(Error::Record {
            path: path.to_path_buf(),
            line: 1,
            message: format!("header must be `{}` with optional `{RATIO_COLUMN}`", TABLE_HEADER.join(",")),
        });
    };
    let mut rows = Vec::new();
    for result in reader.records() {
        let rec = result?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = (|| -> Result<TableRow> {
            Ok(TableRow {
                model: rec[0].to_string(),
                benchmark: rec[1].to_string(),
                budget: parse_num(&rec[2], "budget_s")?,
                data_fraction: parse_num(&rec[3], "data_frac")?,
                eps_avg: parse_num(&rec[4], "nrmse_avg")?,
                eps_worst: parse_num(&rec[5], "nrmse_worst")?,
                n_star_avg: parse_n_star(&rec[6])?,
                n_star_worst: parse_n_star(&rec[7])?,
                robustness_ratio: match rec.get(8) {
                    Some("") | None => None,
                    Some(c) => Some(parse_num(c, RATIO_COLUMN)?),
                },
            })
        })()
        .map_err(|e| Error::Record {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    Ok(ResultTable { with_ratio, rows })
}

pub fn emit_table(table: &ResultTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = TABLE_HEADER.to_vec();
    if table.with_ratio {
        header.push(RATIO_COLUMN);
    }
    w.write_record(&header)?;
    for r in &table.rows {
        let mut cells = vec![
            r.model.clone(),
            r.benchmark.clone(),
            fmt_f64(r.budget),
            fmt_f64(r.data_fraction),
            fmt_f64(r.eps_avg),
            fmt_f64(r.eps_worst),
            n_star_cell(r.n_star_avg),
            n_star_cell(r.n_star_worst),
        ];
        if table.with_ratio {
            cells.push(r.robustness_ratio.map(fmt_f64).unwrap_or_default());
        }
        w.write_record(&cells)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
