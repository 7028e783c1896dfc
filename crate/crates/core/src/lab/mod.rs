//! Experiment pipelines behind the `rfim-lab` binary.
//!
//! Work is split into seed-isolated tasks that run on a worker pool and are
//! merged by task index, so outputs depend only on the configuration.

pub mod config;
pub mod decay;
pub mod goodbox;
pub mod influence;
pub mod partition;
pub mod report;
pub mod verify;

pub use config::{Estimator, ExperimentConfig};
pub use decay::{run_decay_experiment, DecayBin, DecayRecord};
pub use goodbox::{run_goodbox_calibration, GoodBoxReport};
pub use influence::{run_influence_sweep, InfluenceRecord};
pub use partition::{run_partition_experiment, PartitionSummary};
pub use verify::{run_verify_suite, SuiteCheck, SuiteReport, VerifyOptions};

use rayon::prelude::*;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("invariant failure: {0}")]
    Invariant(String),
    #[error("{0}")]
    Runtime(String),
}

impl LabError {
    /// Process exit status: 1 config, 2 invariant, 3 runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config { .. } => 1,
            LabError::Invariant(_) => 2,
            LabError::Runtime(_) => 3,
        }
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Runtime(e.to_string())
    }
}

/// Runs `f(0..n)` on `workers` threads; results come back in index order.
pub fn run_tasks<T, F>(workers: usize, n: usize, f: F) -> Result<Vec<T>, LabError>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| LabError::Runtime(e.to_string()))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(&f).collect()))
}
