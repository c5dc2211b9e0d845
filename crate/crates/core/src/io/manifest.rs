use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::breakeven::{BreakevenResult, SurrogateRecord};
use crate::error::{Error, Result};
use crate::io::trajectory::{sha256_file, sha256_hex, Dtype, FORMAT_VERSION};
use crate::ladder::{EvaluationOptions, LadderEntry, LadderPolicy};
use crate::solver::{CanonicalSpec, InitialConditionOptions};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One cached reference trajectory, relative to the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRef {
    pub seed: u64,
    pub path: String,
    pub sha256: String,
    pub dtype: Dtype,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub benchmark_id: String,
    /// Hash of everything that determines the reference trajectories.
    pub spec_hash: String,
    pub spec: CanonicalSpec,
    pub policy: LadderPolicy,
    pub test_seeds: Vec<u64>,
    pub evaluation: EvaluationOptions,
    /// Free-text description of the machine that measured the costs.
    pub machine: String,
    pub trajectories: Vec<TrajectoryRef>,
    pub ladder: Vec<LadderEntry>,
    pub records: Vec<SurrogateRecord>,
    pub results: Vec<BreakevenResult>,
}

/// SHA-256 over the canonical spec, the initial-condition settings and the
/// trajectory format version.
pub fn spec_hash(spec: &CanonicalSpec) -> Result<String> {
    let ic = InitialConditionOptions::default();
    let key = serde_json::json!({
        "spec": spec,
        "initial_condition": [ic.cutoff, ic.patches, ic.patch_fraction],
        "format_version": FORMAT_VERSION,
    });
    Ok(sha256_hex(serde_json::to_string(&key)?.as_bytes()))
}

pub fn machine_descriptor() -> String {
    let cpu = fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|m| m.trim().to_string())
        })
        .unwrap_or_else(|| "unknown cpu".into());
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!(
        "{} {} / {cpu} / {threads} hardware threads",
        std::env::consts::OS,
        std::env::consts::ARCH
    )
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Check that every referenced trajectory exists under `dir` with the
    /// recorded hash.
    pub fn verify_files(&self, dir: &Path) -> Result<()> {
        for t in &self.trajectories {
            let path = dir.join(&t.path);
            let actual = sha256_file(&path)?;
            if actual != t.sha256 {
                return Err(Error::Format {
                    path,
                    message: format!("hash {actual} does not match manifest {}", t.sha256),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Benchmark;

    #[test]
    fn hash_tracks_the_spec() {
        let a = CanonicalSpec::new(Benchmark::GrayScott);
        let b = a.clone().with_resolution(64).unwrap();
        assert_eq!(spec_hash(&a).unwrap(), spec_hash(&a.clone()).unwrap());
        assert_ne!(spec_hash(&a).unwrap(), spec_hash(&b).unwrap());
        assert_eq!(spec_hash(&a).unwrap().len(), 64);
    }

    #[test]
    fn machine_descriptor_is_stable() {
        assert_eq!(machine_descriptor(), machine_descriptor());
    }
}
