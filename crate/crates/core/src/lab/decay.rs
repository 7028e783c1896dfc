//! Law of `L = |B ∪ B'|` under the plus FK measure with field.

use serde::Serialize;

use super::influence::field_seed;
use super::{run_tasks, ExperimentConfig, LabError};
use crate::coarsegrain::{aux_probability, color, decompose, extract_outmost_blue_boundary, AuxConfig, BlueBoundary};
use crate::disorder::DisorderField;
use crate::exactgibbs::{SpinConfig, Temperature};
use crate::fkising::SwChain;
use crate::graph::{LatticeGraph, Wiring};
use crate::lattice::{CoarseGrid, Region, Site, SiteSet};
use crate::rng::{chain_rng, derive_seed};
use crate::stats::{batch_means, ols, LinearFit};

const TAG_DECAY: u64 = 0x0064_6563_6179;
const TAG_AUX: u64 = 0x0061_7578;

/// Bins with fewer counts are left out of the slope fit.
pub const MIN_FIT_COUNT: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct DecayBin {
    #[serde(rename = "L")]
    pub l: usize,
    pub count: usize,
    pub prob: f64,
    pub prob_stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRecord {
    #[serde(rename = "T")]
    pub t: f64,
    pub eps: f64,
    #[serde(rename = "N")]
    pub n: i64,
    pub q: i32,
    pub k: i32,
    pub p_aux: f64,
    pub samples: usize,
    /// Occupied values of `L` in increasing order.
    pub bins: Vec<DecayBin>,
    /// Fit of `ln P(L ≥ ℓ)` against `ℓ`; `None` when fewer than three bins
    /// have enough counts.
    pub fit: Option<LinearFit>,
    pub fit_bins: usize,
    pub flagged: bool,
    /// Samples where the origin cluster was checked against its enclosure.
    pub containment_checked: usize,
    /// Failed extractions, decompositions or containment checks.
    pub violations: Vec<String>,
}

/// One coarse-grained FK sample.
pub struct DecaySample<'a> {
    pub replica: usize,
    pub index: usize,
    pub grid: &'a CoarseGrid,
    pub boundary: &'a BlueBoundary,
}

struct ReplicaOutcome {
    lengths: Vec<usize>,
    checked: usize,
    violations: Vec<String>,
}

/// `C_o ⊆ Q_{ψ(Ball(B∪B', k))}`, or `C_o ⊆ Q_o` when `B = ∅`.
fn containment(grid: &CoarseGrid, origin_cluster: &[Site], boundary: &BlueBoundary, k: i32) -> Result<(), String> {
    let allowed = if boundary.is_empty() {
        SiteSet::from_sites(grid.coarse(), [Site::ORIGIN]).expect("origin in grid")
    } else {
        decompose(boundary, k)
            .map_err(|e| format!("decomposition: {e}"))?
            .enclosed()
    };
    let fine = grid.fine_set(&allowed);
    match origin_cluster.iter().find(|&&s| !fine.contains(s)) {
        Some(s) => Err(format!("origin cluster leaves its enclosure at {s}")),
        None => Ok(()),
    }
}

fn sample_replica<F: FnMut(&DecaySample<'_>)>(
    cfg: &ExperimentConfig,
    grid: &CoarseGrid,
    replica: usize,
    mut visit: F,
) -> ReplicaOutcome {
    let (tv, eps, n) = (cfg.temperatures[0], cfg.eps[0], cfg.sizes[0]);
    let region = grid.fine();
    let lattice = LatticeGraph::new(region, Wiring::Wired);
    let g = lattice.graph();
    let field = DisorderField::sample(region, field_seed(cfg.seed, n, replica));
    let t = Temperature::new(tv).expect("validated temperature");
    let seed = derive_seed(
        cfg.seed,
        &[TAG_DECAY, tv.to_bits(), eps.to_bits(), n as u64, replica as u64],
    );
    let mut chain = SwChain::new(
        g,
        field.values().to_vec(),
        eps,
        t,
        SpinConfig::uniform(g.n_sites(), 1),
        chain_rng(seed, 0),
    );
    for _ in 0..cfg.burn_in {
        chain.step();
    }
    let p_aux = aux_probability(cfg.c_g, grid.q());
    let mut out = ReplicaOutcome {
        lengths: Vec::with_capacity(cfg.sweeps),
        checked: 0,
        violations: Vec::new(),
    };
    for s in 0..cfg.sweeps {
        chain.step();
        let aux = AuxConfig::sample(grid.coarse(), p_aux, derive_seed(seed, &[TAG_AUX, s as u64]));
        let coloring = color(&lattice, grid, chain.bonds(), &aux);
        let boundary = match extract_outmost_blue_boundary(&coloring, cfg.k) {
            Ok(b) => b,
            Err(e) => {
                out.violations.push(format!("replica {replica} sample {s}: {e}"));
                continue;
            }
        };
        let labeling = chain.labeling();
        if !labeling.origin_wired() {
            let c = labeling.origin_cluster();
            let members: Vec<Site> = (0..g.n_sites())
                .filter(|&v| labeling.label(v) == c)
                .map(|v| region.site(v))
                .collect();
            out.checked += 1;
            if let Err(e) = containment(grid, &members, &boundary, cfg.k) {
                out.violations.push(format!("replica {replica} sample {s}: {e}"));
            }
        }
        out.lengths.push(boundary.union().len());
        visit(&DecaySample {
            replica,
            index: s,
            grid,
            boundary: &boundary,
        });
    }
    out
}

/// Checks the single-valued grids and divisibility; returns the grid.
pub fn decay_grid(cfg: &ExperimentConfig) -> Result<CoarseGrid, LabError> {
    cfg.validate()?;
    for key in ["T", "eps", "N"] {
        cfg.require_single(key)?;
    }
    cfg.validate_divisibility()?;
    let region = Region::new(cfg.sizes[0]).map_err(|e| LabError::Config {
        key: "N".into(),
        msg: e.to_string(),
    })?;
    CoarseGrid::new(region, cfg.q).map_err(|e| LabError::Config {
        key: "q".into(),
        msg: e.to_string(),
    })
}

/// Nonempty `B ∪ B'` sets of every sample, replicas in index order.
pub fn sample_boundary_sets(cfg: &ExperimentConfig) -> Result<(CoarseGrid, Vec<Vec<Site>>), LabError> {
    let grid = decay_grid(cfg)?;
    let per_replica = run_tasks(cfg.workers, cfg.replicas, |r| {
        let mut sets = Vec::new();
        sample_replica(cfg, &grid, r, |s| {
            if !s.boundary.is_empty() {
                sets.push(s.boundary.union().iter().collect::<Vec<Site>>());
            }
        });
        sets
    })?;
    Ok((grid, per_replica.into_iter().flatten().collect()))
}

/// Histogram and tail fit of `L`. Uses the first (only) values of the `T`,
/// `ε` and `N` grids; each replica draws its own field and contributes
/// `sweeps` samples.
pub fn run_decay_experiment(cfg: &ExperimentConfig) -> Result<DecayRecord, LabError> {
    let grid = decay_grid(cfg)?;
    let outcomes = run_tasks(cfg.workers, cfg.replicas, |r| sample_replica(cfg, &grid, r, |_| {}))?;
    let lengths: Vec<usize> = outcomes.iter().flat_map(|o| o.lengths.iter().copied()).collect();
    let checked = outcomes.iter().map(|o| o.checked).sum();
    let violations: Vec<String> = outcomes.into_iter().flat_map(|o| o.violations).collect();
    let (bins, fit, fit_bins) = histogram(&lengths);
    Ok(DecayRecord {
        t: cfg.temperatures[0],
        eps: cfg.eps[0],
        n: cfg.sizes[0],
        q: cfg.q,
        k: cfg.k,
        p_aux: aux_probability(cfg.c_g, cfg.q),
        samples: lengths.len(),
        flagged: fit.is_none(),
        bins,
        fit,
        fit_bins,
        containment_checked: checked,
        violations,
    })
}

/// Occupied bins, the survival fit over bins with at least
/// [`MIN_FIT_COUNT`] counts, and the number of such bins.
pub fn histogram(lengths: &[usize]) -> (Vec<DecayBin>, Option<LinearFit>, usize) {
    let total = lengths.len();
    if total == 0 {
        return (Vec::new(), None, 0);
    }
    let max = *lengths.iter().max().expect("nonempty");
    let mut counts = vec![0usize; max + 1];
    for &l in lengths {
        counts[l] += 1;
    }
    let bins: Vec<DecayBin> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(l, &count)| {
            let indicator: Vec<f64> = lengths.iter().map(|&x| (x == l) as u8 as f64).collect();
            let est = batch_means(&indicator, super::influence::BATCHES);
            DecayBin {
                l,
                count,
                prob: count as f64 / total as f64,
                prob_stderr: est.stderr,
            }
        })
        .collect();
    let mut tail = total;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for b in &bins {
        if b.count >= MIN_FIT_COUNT {
            xs.push(b.l as f64);
            ys.push((tail as f64 / total as f64).ln());
        }
        tail -= b.count;
    }
    let fit = if xs.len() >= 3 { ols(&xs, &ys) } else { None };
    (bins, fit, xs.len())
}
