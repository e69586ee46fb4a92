use std::path::{Path, PathBuf};

use super::{ensure_dir, HarnessError};
use crate::sim::{mix_seed, GridEnvironment};

/// Density of environment `k` in a suite of `count`: a linear ramp from
/// `min` to `max` inclusive.
pub fn suite_density(k: usize, count: usize, min: f64, max: f64) -> f64 {
    if count <= 1 {
        min
    } else {
        min + (max - min) * k as f64 / (count - 1) as f64
    }
}

fn file_name(k: usize) -> String {
    format!("env_{k:02}.grid")
}

/// Writes `env_00.grid ...` into `dir` with increasing clutter.
pub fn gen_env_suite(
    dir: &Path,
    count: usize,
    size: usize,
    density_min: f64,
    density_max: f64,
    seed: u64,
) -> Result<Vec<PathBuf>, HarnessError> {
    if count == 0 {
        return Err(HarnessError::Config("suite needs at least one environment".into()));
    }
    if !(0.0..1.0).contains(&density_min) || !(0.0..1.0).contains(&density_max) || density_min > density_max {
        return Err(HarnessError::Config(format!(
            "density range [{density_min}, {density_max}] must satisfy 0 <= min <= max < 1"
        )));
    }
    ensure_dir(dir)?;
    (0..count)
        .map(|k| {
            let density = suite_density(k, count, density_min, density_max);
            let env = GridEnvironment::generate(size, size, density, mix_seed(seed, k as u64))?;
            let path = dir.join(file_name(k));
            env.save(&path)?;
            Ok(path)
        })
        .collect()
}

/// Loads every `env_*.grid` in `dir`, ordered by file name.
pub fn load_env_suite(dir: &Path) -> Result<Vec<GridEnvironment>, HarnessError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| HarnessError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("env_") && n.ends_with(".grid"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(HarnessError::Config(format!("no env_*.grid files in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| GridEnvironment::load(p).map_err(HarnessError::from))
        .collect()
}
