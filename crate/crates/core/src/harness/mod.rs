//! Evaluation protocol: environment suites, trial execution over
//! environments, start corners and communication success probabilities,
//! metric aggregation, CSV output and SVG charts.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

pub mod metrics;
pub mod output;
pub mod plots;
pub mod suite;
pub mod trials;

pub use metrics::{compute_ofv, decile_distances, summarize, CurveRow, SummaryRow};
pub use output::{
    read_curves_csv, read_series_csv, read_summary_csv, read_trials_csv, write_curves_csv, write_series_csv, write_summary_csv, write_timing_csv,
    write_trials_csv, MethodTiming,
};
pub use plots::{emit_plots, parse_plot_data, PlotPoint};
pub use suite::{gen_env_suite, load_env_suite, suite_density};
pub use trials::{run_trials, run_trials_in_memory, trial_seed, EvalConfig, Policy, TrialRecord};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Grid(#[from] crate::sim::GridError),
    #[error(transparent)]
    Weights(#[from] crate::nn::WeightFileError),
    #[error(transparent)]
    Encoding(#[from] crate::training::EncodingError),
    #[error(transparent)]
    Network(#[from] crate::nn::NnError),
    #[error("csv error on {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("series length mismatch: {explored} explored counts vs {distance} distances")]
    LengthMismatch { explored: usize, distance: usize },
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, source: csv::Error) -> Self {
        HarnessError::Csv {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Evaluated policy families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    MadeNet,
    MadeNetDt,
    Nf,
    Ub,
    Pb,
    Random,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::MadeNet,
        Method::MadeNetDt,
        Method::Nf,
        Method::Ub,
        Method::Pb,
        Method::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::MadeNet => "made-net",
            Method::MadeNetDt => "made-net-dt",
            Method::Nf => "nf",
            Method::Ub => "ub",
            Method::Pb => "pb",
            Method::Random => "random",
        }
    }

    pub fn is_learned(self) -> bool {
        matches!(self, Method::MadeNet | Method::MadeNetDt)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| HarnessError::Config(format!("unknown method `{s}`")))
    }
}

/// Output file names inside an evaluation directory.
pub mod files {
    pub const TRIALS: &str = "trials.csv";
    pub const SERIES: &str = "series.csv";
    pub const TIMING: &str = "timing.csv";
    pub const SUMMARY: &str = "summary.csv";
    pub const CURVES: &str = "curves.csv";
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<PathBuf, HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    Ok(dir.to_path_buf())
}
