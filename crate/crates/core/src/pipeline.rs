//! End-to-end breakeven evaluation of one benchmark.

use std::fs;
use std::path::Path;

use crate::breakeven::compute_breakeven;
use crate::error::{Error, Result};
use crate::grid::Trajectory;
use crate::io::{
    emit_report, load_records, machine_descriptor, read_trajectory, sha256_file, spec_hash, write_trajectory, Dtype,
    ReportFormat, RunManifest, TrajectoryMeta, TrajectoryRef, TOOLKIT_VERSION,
};
use crate::ladder::{
    build_ladder, check_timing_environment, evaluate_ladder, generate_references, EvaluationOptions, LadderPolicy,
    ReferenceSet, DEFAULT_TEST_SEEDS,
};
use crate::solver::{Benchmark, CanonicalSpec};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRAJECTORY_DIR: &str = "trajectories";

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOptions {
    pub test_seeds: Vec<u64>,
    /// Base resolution; the canonical one when `None`.
    pub resolution: Option<usize>,
    pub evaluation: EvaluationOptions,
    pub dtype: Dtype,
    pub formats: Vec<ReportFormat>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            test_seeds: (0..DEFAULT_TEST_SEEDS as u64).collect(),
            resolution: None,
            evaluation: EvaluationOptions::default(),
            dtype: Dtype::F64,
            formats: vec![ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Plotdata],
        }
    }
}

fn same_benchmark(id: &str, benchmark: Benchmark) -> bool {
    id.parse::<Benchmark>().map_or(id == benchmark.id(), |b| b == benchmark)
}

fn trajectory_meta(spec: &CanonicalSpec, seed: u64) -> TrajectoryMeta {
    TrajectoryMeta {
        pde_id: spec.pde.id(),
        seed,
        length: spec.grid.length(),
        times: spec.config.frame_times(),
    }
}

/// Reference trajectories for `seeds`, read from `cached` where the file is
/// present and intact and simulated otherwise. Returns the set and the file
/// references for all seeds.
pub fn references(
    spec: &CanonicalSpec,
    seeds: &[u64],
    cached: &[TrajectoryRef],
    out_dir: &Path,
    dtype: Dtype,
) -> Result<(ReferenceSet, Vec<TrajectoryRef>)> {
    let mut found: Vec<(TrajectoryRef, Trajectory)> = Vec::new();
    let mut missing = Vec::new();
    for &seed in seeds {
        let hit = cached.iter().find(|t| t.seed == seed && t.dtype == dtype).and_then(|t| {
            let path = out_dir.join(&t.path);
            match sha256_file(&path) {
                Ok(h) if h == t.sha256 => read_trajectory(&path, &trajectory_meta(spec, seed))
                    .ok()
                    .map(|traj| (t.clone(), traj)),
                _ => None,
            }
        });
        match hit {
            Some(pair) => found.push(pair),
            None => missing.push(seed),
        }
    }
    let fresh = generate_references(&spec.pde, &spec.grid, &spec.config, &missing)?;
    fs::create_dir_all(out_dir.join(TRAJECTORY_DIR))?;
    for traj in fresh.trajectories {
        let rel = format!("{TRAJECTORY_DIR}/{}_n{}_seed{}.bkev", spec.benchmark.id(), spec.grid.n(), traj.seed);
        let sha256 = write_trajectory(&out_dir.join(&rel), &traj, dtype)?;
        found.push((
            TrajectoryRef {
                seed: traj.seed,
                path: rel,
                sha256,
                dtype,
            },
            traj,
        ));
    }
    found.sort_by_key(|(r, _)| r.seed);
    let (refs, trajectories): (Vec<_>, Vec<_>) = found.into_iter().unzip();
    Ok((
        ReferenceSet {
            pde: spec.pde.clone(),
            grid: spec.grid,
            config: spec.config.clone(),
            trajectories,
        },
        refs,
    ))
}

/// Generate or reuse references, evaluate the ladder, match every record of
/// this benchmark, then write the manifest and reports into `out_dir`.
///
/// An existing manifest in `out_dir` with the same spec hash supplies cached
/// trajectories. Refuses to run while another process holds the timing lock.
pub fn run_pipeline(
    benchmark: Benchmark,
    policy: &LadderPolicy,
    records_path: &Path,
    out_dir: &Path,
    opts: &PipelineOptions,
) -> Result<RunManifest> {
    check_timing_environment()?;
    policy.validate()?;
    if opts.test_seeds.is_empty() {
        return Err(Error::arg("no test seeds"));
    }
    let records: Vec<_> = load_records(records_path)?
        .into_iter()
        .filter(|r| same_benchmark(&r.benchmark, benchmark))
        .collect();
    if records.is_empty() {
        return Err(Error::arg(format!(
            "{} has no records for benchmark {}",
            records_path.display(),
            benchmark.id()
        )));
    }
    let mut spec = CanonicalSpec::new(benchmark);
    if let Some(n) = opts.resolution {
        spec = spec.with_resolution(n)?;
    }
    let hash = spec_hash(&spec)?;
    fs::create_dir_all(out_dir)?;
    let manifest_path = out_dir.join(MANIFEST_FILE);
    let cached = if manifest_path.exists() {
        let previous = RunManifest::load(&manifest_path)?;
        if previous.spec_hash == hash {
            previous.trajectories
        } else {
            Vec::new()
        }
    } else {
        Vec::new()
    };
    let (refs, trajectories) = references(&spec, &opts.test_seeds, &cached, out_dir, opts.dtype)?;
    let ladder_configs = build_ladder(&spec.grid, &spec.config, policy)?;
    let ladder = evaluate_ladder(&refs, &ladder_configs, &opts.test_seeds, &opts.evaluation)?;
    let results = records
        .iter()
        .map(|r| compute_breakeven(r, &ladder))
        .collect::<Result<Vec<_>>>()?;
    let manifest = RunManifest {
        toolkit_version: TOOLKIT_VERSION.into(),
        benchmark_id: benchmark.id(),
        spec_hash: hash,
        spec,
        policy: policy.clone(),
        test_seeds: opts.test_seeds.clone(),
        evaluation: opts.evaluation.clone(),
        machine: machine_descriptor(),
        trajectories,
        ladder,
        records,
        results,
    };
    manifest.save(&manifest_path)?;
    for &format in &opts.formats {
        emit_report(&manifest, format, out_dir)?;
    }
    Ok(manifest)
}
