//! Report tables and plot-data files.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::breakeven::{crossover_costs, BreakevenResult, ErrorMode, NStar};
use crate::error::{Error, Result};
use crate::io::manifest::RunManifest;
use crate::io::table::{emit_table, ResultTable, TableRow, UNMATCHED};
use crate::io::fmt_f64;
use crate::ladder::LadderEntry;
use crate::scaling::BudgetAllocation;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Plotdata,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "plotdata" => Ok(ReportFormat::Plotdata),
            other => Err(Error::arg(format!("unknown report format `{other}`"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Markdown => "markdown",
            ReportFormat::Csv => "csv",
            ReportFormat::Plotdata => "plotdata",
        })
    }
}

pub fn machine_warning(machine: &str) -> String {
    format!(
        "Costs were measured on: {machine}. Absolute breakeven values depend on that \
         machine's hardware and load and do not transfer to other machines."
    )
}

pub fn result_table(results: &[BreakevenResult]) -> ResultTable {
    ResultTable {
        with_ratio: true,
        rows: results.iter().map(TableRow::from_result).collect(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn n_star_text(n: Option<NStar>) -> String {
    n.map_or(UNMATCHED.to_string(), |n| n.rounded())
}

pub fn render_markdown(m: &RunManifest) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Breakeven report: {}\n", m.benchmark_id);
    let _ = writeln!(s, "> {}\n", machine_warning(&m.machine));
    let _ = writeln!(s, "Test seeds: {}. Spec hash: `{}`.\n", m.test_seeds.len(), m.spec_hash);
    s.push_str("## Classical ladder\n\n");
    s.push_str("| resolution | dt | cost (s) | nRMSE avg | nRMSE worst |\n|---:|---:|---:|---:|---:|\n");
    for e in &m.ladder {
        let cell = |v: Option<f64>, digits: usize| v.map_or("infeasible".to_string(), |v| format!("{v:.digits$}"));
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} |",
            e.config.resolution,
            e.config.dt,
            cell(e.cost, 4),
            cell(e.eps_avg, 4),
            cell(e.eps_worst, 4)
        );
    }
    s.push_str("\n## Breakeven complexity\n\n");
    s.push_str(
        "| model | budget (s) | data % | nRMSE avg | nRMSE worst | N* avg | N* worst | robustness ratio |\n\
         |---|---:|---:|---:|---:|---:|---:|---:|\n",
    );
    for r in &m.results {
        let rec = &r.record;
        let _ = writeln!(
            s,
            "| {} | {} | {:.2}% | {:.4} | {:.4} | {} | {} | {} |",
            rec.model,
            rec.budget,
            100.0 * rec.data_fraction,
            rec.eps_avg,
            rec.eps_worst,
            n_star_text(r.n_star_avg),
            n_star_text(r.n_star_worst),
            r.robustness_ratio().map(|v| format!("{v:.3}")).unwrap_or_default()
        );
    }
    s
}

pub fn ladder_plotdata(ladder: &[LadderEntry]) -> String {
    let mut s = String::from("resolution,dt,cost_s,nrmse_avg,nrmse_worst,feasible\n");
    for e in ladder {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            e.config.resolution,
            fmt_f64(e.config.dt),
            opt(e.cost),
            opt(e.eps_avg),
            opt(e.eps_worst),
            e.feasible
        );
    }
    s
}

/// Points per decade of the crossover grid.
const CROSSOVER_PER_DECADE: i32 = 8;
/// Decades on either side of the breakeven point.
const CROSSOVER_DECADES: i32 = 2;

/// Log-spaced solve counts around `n_star` with `n_star` itself as the
/// middle point; `1 ..= 10^6` when the break-even point is at infinity.
pub fn crossover_grid(n_star: NStar) -> Vec<f64> {
    let k = CROSSOVER_PER_DECADE * CROSSOVER_DECADES;
    match n_star {
        NStar::Finite(n) => (-k..=k)
            .map(|i| {
                if i == 0 {
                    n
                } else {
                    n * 10f64.powf(i as f64 / CROSSOVER_PER_DECADE as f64)
                }
            })
            .collect(),
        NStar::Infinite => (0..=6 * CROSSOVER_PER_DECADE)
            .map(|i| 10f64.powf(i as f64 / CROSSOVER_PER_DECADE as f64))
            .collect(),
    }
}

pub fn crossover_plotdata(results: &[BreakevenResult]) -> String {
    let mut s = String::from("model,benchmark,budget_s,mode,n,surrogate_cost_s,classical_cost_s\n");
    for r in results {
        for (mode, matched, n_star) in [
            (ErrorMode::Avg, &r.matched_avg, r.n_star_avg),
            (ErrorMode::Worst, &r.matched_worst, r.n_star_worst),
        ] {
            let (Some(entry), Some(n_star)) = (matched, n_star) else {
                continue;
            };
            let Some(cost) = entry.cost else { continue };
            for p in crossover_costs(r.record.budget, r.record.c_inf, cost, &crossover_grid(n_star)) {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.record.model,
                    r.record.benchmark,
                    fmt_f64(r.record.budget),
                    mode,
                    fmt_f64(p.n),
                    fmt_f64(p.surrogate),
                    fmt_f64(p.classical)
                );
            }
        }
    }
    s
}

pub fn budget_nstar_plotdata(results: &[BreakevenResult]) -> String {
    let mut rows: Vec<&BreakevenResult> = results.iter().collect();
    rows.sort_by(|a, b| {
        a.record
            .model
            .cmp(&b.record.model)
            .then(a.record.budget.total_cmp(&b.record.budget))
    });
    let mut s = String::from("model,benchmark,budget_s,nstar_avg,nstar_worst\n");
    for r in rows {
        let cell = |n: Option<NStar>| n.map_or(UNMATCHED.to_string(), |n| n.to_string());
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.record.model,
            r.record.benchmark,
            fmt_f64(r.record.budget),
            cell(r.n_star_avg),
            cell(r.n_star_worst)
        );
    }
    s
}

pub fn frontier_csv(allocations: &[BudgetAllocation]) -> String {
    let mut s = String::from("B,n_opt,eps\n");
    for a in allocations {
        let _ = writeln!(s, "{},{},{}", fmt_f64(a.budget), a.n_data, fmt_f64(a.predicted_error));
    }
    s
}

/// Write the report files for `format` into `out_dir`; returns their paths.
pub fn emit_report(m: &RunManifest, format: ReportFormat, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let files: Vec<(&str, String)> = match format {
        ReportFormat::Markdown => vec![("report.md", render_markdown(m))],
        ReportFormat::Csv => vec![("report.csv", emit_table(&result_table(&m.results))?)],
        ReportFormat::Plotdata => {
            fs::create_dir_all(out_dir.join("plotdata"))?;
            vec![
                ("plotdata/ladder.csv", ladder_plotdata(&m.ladder)),
                ("plotdata/crossover.csv", crossover_plotdata(&m.results)),
                ("plotdata/budget_nstar.csv", budget_nstar_plotdata(&m.results)),
            ]
        }
    };
    let mut written = Vec::with_capacity(files.len());
    for (name, text) in files {
        let path = out_dir.join(name);
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}
