use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use breakeven::breakflow::{emit_geometry, emit_sim_config, generate_layout, SimConfigSpec};
use breakeven::io::report::ladder_plotdata;
use breakeven::io::{emit_report, frontier_csv, parse_scaling_points, Dtype, ReportFormat, RunManifest};
use breakeven::ladder::{build_ladder, evaluate_ladder, EvaluationOptions, LadderPolicy, DEFAULT_TEST_SEEDS};
use breakeven::pipeline::{references, run_pipeline, PipelineOptions, MANIFEST_FILE};
use breakeven::scaling::{fit_scaling_with, frontier, FitObjective, FitOptions};
use breakeven::solver::{Benchmark, CanonicalSpec};
use breakeven::{io, parallel};

#[derive(Parser)]
#[command(name = "bkev", version, about = "Breakeven complexity of PDE surrogates against error-matched solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate reference trajectories and write them as .bkev files.
    Generate(GenerateArgs),
    /// Build and evaluate a fidelity ladder.
    Ladder(LadderArgs),
    /// Fit a scaling law to (n_data, c_train, loss) observations.
    FitScaling(FitArgs),
    /// Full pipeline: references, ladder, error matching and N*.
    Breakeven(BreakevenArgs),
    /// Random obstacle layouts with mesh and solver scripts.
    BreakflowGeom(GeomArgs),
    /// Re-emit reports from a saved run manifest.
    Report(ReportArgs),
}

#[derive(Args)]
struct SpecArgs {
    /// ns, ks (2D), ks1d, ks3d or gs.
    #[arg(long, value_parser = parse_benchmark)]
    benchmark: Benchmark,
    /// Base resolution; the canonical one by default.
    #[arg(long)]
    resolution: Option<usize>,
    /// Seed range `A..B` (end exclusive) or comma list.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<Seeds>,
}

impl SpecArgs {
    fn spec(&self) -> Result<CanonicalSpec> {
        let spec = CanonicalSpec::new(self.benchmark);
        Ok(match self.resolution {
            Some(n) => spec.with_resolution(n)?,
            None => spec,
        })
    }

    fn seeds(&self) -> Vec<u64> {
        self.seeds.clone().map_or_else(|| (0..DEFAULT_TEST_SEEDS as u64).collect(), |s| s.0)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DtypeArg {
    F32,
    F64,
}

impl From<DtypeArg> for Dtype {
    fn from(d: DtypeArg) -> Self {
        match d {
            DtypeArg::F32 => Dtype::F32,
            DtypeArg::F64 => Dtype::F64,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "f64")]
    dtype: DtypeArg,
}

#[derive(Args)]
struct TimingArgs {
    #[arg(long, default_value_t = 1)]
    n_warmup: usize,
    #[arg(long, default_value_t = 3)]
    n_timed: usize,
}

impl TimingArgs {
    fn options(&self) -> EvaluationOptions {
        EvaluationOptions {
            n_warmup: self.n_warmup,
            n_timed: self.n_timed,
        }
    }
}

#[derive(Args)]
struct LadderArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// JSON policy file or coarsening factors such as `1,2,4,8`.
    #[arg(long, value_parser = parse_policy, default_value = "1,2,4,8")]
    policy: LadderPolicy,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    timing: TimingArgs,
}

#[derive(Args)]
struct FitArgs {
    /// CSV with header `n_data,c_train,loss`.
    input: PathBuf,
    /// Seconds to generate one training trajectory.
    #[arg(long)]
    c_gen: Option<f64>,
    /// Comma-separated total budgets for the allocation frontier.
    #[arg(long, value_delimiter = ',')]
    budget: Vec<f64>,
    /// Frontier CSV; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    starts: usize,
    #[arg(long)]
    huber: Option<f64>,
}

#[derive(Args)]
struct BreakevenArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Surrogate records, CSV or JSON.
    #[arg(long)]
    records: PathBuf,
    #[arg(long, value_parser = parse_policy, default_value = "1,2,4,8")]
    policy: LadderPolicy,
    #[arg(long)]
    out: PathBuf,
    /// Report formats: markdown, csv, plotdata.
    #[arg(long, value_delimiter = ',', default_value = "markdown,csv,plotdata")]
    format: Vec<ReportFormat>,
    #[arg(long, value_enum, default_value = "f64")]
    dtype: DtypeArg,
    #[command(flatten)]
    timing: TimingArgs,
}

#[derive(Args)]
struct GeomArgs {
    /// First layout seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Mesh coarsening factor, at least 1.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Reynolds-number bin (1, 2 or 3).
    #[arg(long, default_value_t = 1)]
    re_bin: u8,
    /// Fixed Reynolds number inside the bin.
    #[arg(long)]
    re: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Run manifest or the directory holding it.
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory; the manifest's directory by default.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "markdown,csv,plotdata")]
    format: Vec<ReportFormat>,
}

#[derive(Clone, Debug, PartialEq)]
struct Seeds(Vec<u64>);

fn parse_benchmark(s: &str) -> Result<Benchmark, String> {
    s.parse().map_err(|e: breakeven::Error| e.to_string())
}

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| format!("bad seed range `{s}`"))?;
        let b: u64 = b.trim().parse().map_err(|_| format!("bad seed range `{s}`"))?;
        (a..b).collect()
    } else {
        s.split(',')
            .map(|v| v.trim().parse().map_err(|_| format!("bad seed `{v}`")))
            .collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err(format!("`{s}` selects no seeds"));
    }
    Ok(Seeds(seeds))
}

fn parse_policy(s: &str) -> Result<LadderPolicy, String> {
    let path = Path::new(s);
    let policy = if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| format!("{s}: {e}"))?;
        serde_json::from_str(&text).map_err(|e| format!("{s}: {e}"))?
    } else {
        let factors = s
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| format!("`{s}` is neither a policy file nor a factor list")))
            .collect::<Result<Vec<_>, _>>()?;
        LadderPolicy::fixed_dt(factors)
    };
    policy.validate().map_err(|e| e.to_string())?;
    Ok(policy)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("{}", path.display());
    Ok(())
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let spec = args.spec.spec()?;
    fs::create_dir_all(&args.out)?;
    let (_, refs) = references(&spec, &args.spec.seeds(), &[], &args.out, args.dtype.into())?;
    let index = serde_json::json!({
        "spec_hash": io::spec_hash(&spec)?,
        "spec": spec,
        "trajectories": refs,
    });
    write(&args.out.join("trajectories.json"), &serde_json::to_string_pretty(&index)?)
}

fn ladder(args: &LadderArgs) -> Result<()> {
    let spec = args.spec.spec()?;
    let seeds = args.spec.seeds();
    let refs = breakeven::ladder::generate_references(&spec.pde, &spec.grid, &spec.config, &seeds)?;
    let configs = build_ladder(&spec.grid, &spec.config, &args.policy)?;
    let entries = evaluate_ladder(&refs, &configs, &seeds, &args.timing.options())?;
    fs::create_dir_all(&args.out)?;
    write(&args.out.join("ladder.json"), &serde_json::to_string_pretty(&entries)?)?;
    write(&args.out.join("ladder.csv"), &ladder_plotdata(&entries))
}

fn fit(args: &FitArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let points = parse_scaling_points(&text, &args.input)?;
    let mut opts = FitOptions {
        starts: args.starts,
        seed: args.seed,
        ..FitOptions::default()
    };
    if let Some(delta) = args.huber {
        opts.objective = FitObjective::Huber;
        opts.huber_delta = delta;
    }
    let fit = fit_scaling_with(&points, &opts)?;
    eprintln!(
        "L = {} + {} n^-{} + {} C^-{}  (log residual {:.3e}, {} points)",
        fit.l_inf, fit.a, fit.alpha, fit.d, fit.beta, fit.fit_residual, fit.n_points
    );
    if args.budget.is_empty() {
        println!("{}", serde_json::to_string_pretty(&fit)?);
        return Ok(());
    }
    let Some(c_gen) = args.c_gen else {
        bail!("--budget needs --c-gen");
    };
    let csv = frontier_csv(&frontier(&fit, c_gen, &args.budget)?);
    match &args.out {
        Some(path) => write(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn breakeven_run(args: &BreakevenArgs) -> Result<()> {
    let opts = PipelineOptions {
        test_seeds: args.spec.seeds(),
        resolution: args.spec.resolution,
        evaluation: args.timing.options(),
        dtype: args.dtype.into(),
        formats: args.format.clone(),
    };
    let m = run_pipeline(args.spec.benchmark, &args.policy, &args.records, &args.out, &opts)?;
    for r in &m.results {
        println!("{}\tN*avg={}\tN*worst={}", r.record.model, label(r.n_star_avg), label(r.n_star_worst));
    }
    println!("{}", args.out.join(MANIFEST_FILE).display());
    Ok(())
}

fn label(n: Option<breakeven::breakeven::NStar>) -> String {
    n.map_or_else(|| "unmatched".into(), |n| n.to_string())
}

fn geom(args: &GeomArgs) -> Result<()> {
    fs::create_dir_all(&args.out)?;
    let mut sim = SimConfigSpec::new(args.re_bin, args.scale);
    sim.re = args.re;
    for seed in args.seed..args.seed + args.count {
        let layout = generate_layout(seed);
        write(&args.out.join(format!("layout_{seed}.json")), &serde_json::to_string_pretty(&layout)?)?;
        write(&args.out.join(format!("mesh_{seed}.geo")), &emit_geometry(&layout, args.scale)?)?;
        write(&args.out.join(format!("sim_{seed}.ini")), &emit_sim_config(&sim, seed)?)?;
    }
    Ok(())
}

fn report(args: &ReportArgs) -> Result<()> {
    let path = if args.manifest.is_dir() {
        args.manifest.join(MANIFEST_FILE)
    } else {
        args.manifest.clone()
    };
    let m = RunManifest::load(&path)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf));
    for &format in &args.format {
        for p in emit_report(&m, format, &out)? {
            println!("{}", p.display());
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = parallel::requested_threads() {
        eprintln!("using {n} worker threads");
    }
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Ladder(a) => ladder(a),
        Command::FitScaling(a) => fit(a),
        Command::Breakeven(a) => breakeven_run(a),
        Command::BreakflowGeom(a) => geom(a),
        Command::Report(a) => report(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("2..5").unwrap(), Seeds(vec![2, 3, 4]));
        assert_eq!(parse_seeds("7, 1").unwrap(), Seeds(vec![7, 1]));
        assert!(parse_seeds("5..5").is_err());
        assert!(parse_seeds("a").is_err());
    }

    #[test]
    fn policies() {
        assert_eq!(parse_policy("1,2,4").unwrap(), LadderPolicy::fixed_dt(vec![1.0, 2.0, 4.0]));
        assert!(parse_policy("1,x").is_err());
        assert!(parse_policy("0.5").is_err());
    }

    #[test]
    fn policy_file() {
        let dir = std::env::temp_dir().join(format!("bkev-policy-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfl.json");
        fs::write(&path, r#"{"factors": [1, 2, 4], "timestep_rule": {"rule": "cfl-scaled", "u_max": 1.5, "target_cfl": 0.5}}"#)
            .unwrap();
        let p = parse_policy(path.to_str().unwrap()).unwrap();
        assert_eq!(p.factors, vec![1.0, 2.0, 4.0]);
        assert!(matches!(p.timestep_rule, breakeven::ladder::TimestepRule::CflScaled { target_cfl, .. } if target_cfl == 0.5));
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn command_line_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
