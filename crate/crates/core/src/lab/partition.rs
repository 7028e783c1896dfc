//! Padded partitions of sampled `B ∪ B'` sets.

use serde::{Deserialize, Serialize};

use super::decay::sample_boundary_sets;
use super::{run_tasks, ExperimentConfig, LabError};
use crate::lattice::Site;
use crate::metricpartition::{partition_boundary_set, BoundaryPartition};
use crate::rng::{chain_rng, derive_seed};
use crate::stats::mean_stderr;

const TAG_PARTITION: u64 = 0x7061_7274;

/// Boundary-point fraction per partition scale `R = q^4`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub q: i32,
    pub sets: usize,
    pub mean_fraction: f64,
    pub stderr: f64,
    pub mean_c1: f64,
    /// Points padded only because their radius-16 ball is a singleton.
    pub degenerate_points: usize,
}

/// Partitions every set with `R = q^4` for each `q`; the per-set stream is
/// keyed by `(seed, q, set index)`.
pub fn partition_sets(
    sets: &[Vec<Site>],
    q_grid: &[i32],
    seed: u64,
    workers: usize,
) -> Result<Vec<PartitionSummary>, LabError> {
    let mut out = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        let parts = run_tasks(workers, sets.len(), |i| {
            let mut rng = chain_rng(derive_seed(seed, &[TAG_PARTITION, q as u64, i as u64]), 0);
            partition_boundary_set(&sets[i], q, &mut rng).expect("nonempty set")
        })?;
        let fractions: Vec<f64> = parts.iter().map(BoundaryPartition::boundary_fraction).collect();
        let c1: Vec<f64> = parts.iter().map(BoundaryPartition::c1).collect();
        let est = mean_stderr(&fractions);
        out.push(PartitionSummary {
            q,
            sets: sets.len(),
            mean_fraction: est.mean,
            stderr: est.stderr,
            mean_c1: c1.iter().sum::<f64>() / c1.len().max(1) as f64,
            degenerate_points: parts.iter().map(|p| p.degenerate.iter().filter(|&&d| d).count()).sum(),
        });
    }
    Ok(out)
}

pub struct PartitionOutcome {
    pub summaries: Vec<PartitionSummary>,
    /// The first sampled set and its partition at the config's `q`.
    pub example: Option<(Vec<Site>, BoundaryPartition)>,
}

/// Samples sets as the decay experiment does and partitions each at every
/// scale in `q_grid`.
pub fn run_partition_experiment(cfg: &ExperimentConfig) -> Result<PartitionOutcome, LabError> {
    let (_, sets) = sample_boundary_sets(cfg)?;
    if sets.is_empty() {
        return Err(LabError::Runtime("no sample had a nonempty blue boundary".into()));
    }
    let summaries = partition_sets(&sets, &cfg.q_grid, cfg.seed, cfg.workers)?;
    let mut rng = chain_rng(derive_seed(cfg.seed, &[TAG_PARTITION, cfg.q as u64, 0]), 0);
    let example = partition_boundary_set(&sets[0], cfg.q, &mut rng)
        .ok()
        .map(|p| (sets[0].clone(), p));
    Ok(PartitionOutcome { summaries, example })
}
