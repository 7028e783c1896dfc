//! Boundary influence `m = μ⁺(σ_o = 1) − μ⁻(σ_o = 1)` by Swendsen–Wang.
//!
//! The minus measure with field `εh` is the spin flip of the plus measure
//! with field `−εh`, so both chains are plus-wired:
//! `m = 1 − μ⁺_{εh}(σ_o = −1) − μ⁺_{−εh}(σ_o = −1)`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{run_tasks, Estimator, ExperimentConfig, LabError};
use crate::disorder::DisorderField;
use crate::exactgibbs::{SpinConfig, Temperature};
use crate::fkising::SwChain;
use crate::graph::{Graph, LatticeGraph, Wiring};
use crate::lattice::Region;
use crate::rng::{chain_rng, derive_seed};
use crate::stats::{batch_means, mean_stderr, Estimate};

const TAG_FIELD: u64 = 0x0066_6965_6c64;
const TAG_CHAIN: u64 = 0x0063_6861_696e;
const SEED_BITS: u64 = (1 << 48) - 1;

pub const BATCHES: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluenceRecord {
    #[serde(rename = "T")]
    pub t: f64,
    pub eps: f64,
    #[serde(rename = "N")]
    pub n: i64,
    pub replica: usize,
    pub m_hat: f64,
    pub stderr: f64,
    pub sweeps: usize,
    /// Wall time, recorded only on request so that CSVs stay reproducible.
    pub seconds: Option<f64>,
}

impl InfluenceRecord {
    /// `m̂ + 3 stderr ≥ 0`.
    pub fn fkg_ok(&self) -> bool {
        self.m_hat + 3.0 * self.stderr >= 0.0
    }

    /// `m̂ ∈ [−3 stderr, 1 + 3 stderr]`.
    pub fn in_range(&self) -> bool {
        self.m_hat >= -3.0 * self.stderr && self.m_hat <= 1.0 + 3.0 * self.stderr
    }
}

/// Seed of the disorder field for `(N, replica)`; it does not depend on `T`
/// or `ε`, so a replica sees the same field across the grid.
pub fn field_seed(master: u64, n: i64, replica: usize) -> u64 {
    derive_seed(master, &[TAG_FIELD, n as u64, replica as u64]) & SEED_BITS
}

/// Per-sweep series `1 − a_t − b_t` of one plus/minus chain pair.
#[allow(clippy::too_many_arguments)]
fn influence_series(
    graph: &Graph,
    h: &[f64],
    eps: f64,
    t: Temperature,
    estimator: Estimator,
    burn_in: usize,
    sweeps: usize,
    seed: u64,
) -> Vec<f64> {
    let n = graph.n_sites();
    let origin = graph.origin();
    let minus_h: Vec<f64> = h.iter().map(|x| -x).collect();
    let mut plus = SwChain::new(graph, h.to_vec(), eps, t, SpinConfig::uniform(n, 1), chain_rng(seed, 0));
    let mut minus = SwChain::new(graph, minus_h, eps, t, SpinConfig::uniform(n, 1), chain_rng(seed, 1));
    for _ in 0..burn_in {
        plus.step();
        minus.step();
    }
    let read = |c: &SwChain<'_, _>| match estimator {
        Estimator::RaoBlackwell => c.rao_blackwell_minus_prob(),
        Estimator::Raw => (c.spins().get(origin) < 0) as u8 as f64,
    };
    (0..sweeps)
        .map(|_| {
            plus.step();
            minus.step();
            1.0 - read(&plus) - read(&minus)
        })
        .collect()
}

/// `m̂` from `chains` independent chain pairs on a plus-wired graph.
#[allow(clippy::too_many_arguments)]
pub fn estimate_influence(
    graph: &Graph,
    h: &[f64],
    eps: f64,
    t: Temperature,
    estimator: Estimator,
    burn_in: usize,
    sweeps: usize,
    chains: usize,
    seed: u64,
) -> Estimate {
    let per_chain: Vec<Estimate> = (0..chains)
        .map(|c| {
            let series = influence_series(
                graph,
                h,
                eps,
                t,
                estimator,
                burn_in,
                sweeps,
                derive_seed(seed, &[TAG_CHAIN, c as u64]),
            );
            batch_means(&series, BATCHES)
        })
        .collect();
    let k = chains as f64;
    let mean = per_chain.iter().map(|e| e.mean).sum::<f64>() / k;
    let var = per_chain.iter().map(|e| e.stderr * e.stderr).sum::<f64>();
    Estimate::new(mean, var.sqrt() / k)
}

#[derive(Clone, Copy, Debug)]
struct Task {
    t: f64,
    eps: f64,
    n: i64,
    replica: usize,
}

fn tasks(cfg: &ExperimentConfig) -> Vec<Task> {
    let mut out = Vec::new();
    for &t in &cfg.temperatures {
        for &eps in &cfg.eps {
            for &n in &cfg.sizes {
                for replica in 0..cfg.replicas {
                    out.push(Task { t, eps, n, replica });
                }
            }
        }
    }
    out
}

/// One record per `(T, ε, N, replica)` in grid order.
pub fn run_influence_sweep(cfg: &ExperimentConfig, timing: bool) -> Result<Vec<InfluenceRecord>, LabError> {
    cfg.validate()?;
    let list = tasks(cfg);
    run_tasks(cfg.workers, list.len(), |i| {
        let task = list[i];
        let start = Instant::now();
        let region = Region::new(task.n).expect("validated half-side");
        let lattice = LatticeGraph::new(region, Wiring::Wired);
        let field = DisorderField::sample(region, field_seed(cfg.seed, task.n, task.replica));
        let t = Temperature::new(task.t).expect("validated temperature");
        let seed = derive_seed(
            cfg.seed,
            &[
                TAG_CHAIN,
                task.t.to_bits(),
                task.eps.to_bits(),
                task.n as u64,
                task.replica as u64,
            ],
        );
        let est = estimate_influence(
            lattice.graph(),
            field.values(),
            task.eps,
            t,
            cfg.estimator,
            cfg.burn_in,
            cfg.sweeps,
            cfg.chains,
            seed,
        );
        InfluenceRecord {
            t: task.t,
            eps: task.eps,
            n: task.n,
            replica: task.replica,
            m_hat: est.mean,
            stderr: est.stderr,
            sweeps: cfg.sweeps,
            seconds: timing.then(|| start.elapsed().as_secs_f64()),
        }
    })
}

/// Replica average of `m̂` per `(T, ε, N)`. With two or more replicas the
/// error comes from the replica scatter, which carries both thermal and
/// disorder fluctuations; a single replica keeps its thermal error.
#[derive(Clone, Debug, Serialize)]
pub struct InfluenceSummary {
    #[serde(rename = "T")]
    pub t: f64,
    pub eps: f64,
    #[serde(rename = "N")]
    pub n: i64,
    pub replicas: usize,
    pub m_mean: f64,
    pub stderr: f64,
}

type Group<'a> = ((f64, f64, i64), Vec<&'a InfluenceRecord>);

pub fn summarize(records: &[InfluenceRecord]) -> Vec<InfluenceSummary> {
    let mut groups: Vec<Group<'_>> = Vec::new();
    for r in records {
        let key = (r.t, r.eps, r.n);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, g)) => g.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|((t, eps, n), g)| {
            let values: Vec<f64> = g.iter().map(|r| r.m_hat).collect();
            let est = if g.len() >= 2 {
                mean_stderr(&values)
            } else {
                Estimate::new(g[0].m_hat, g[0].stderr)
            };
            InfluenceSummary {
                t,
                eps,
                n,
                replicas: g.len(),
                m_mean: est.mean,
                stderr: est.stderr,
            }
        })
        .collect()
}
