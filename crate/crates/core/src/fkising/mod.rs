//! Bond configurations, cluster labeling, FK weights with external field,
//! the Edwards–Sokal conditionals and the Swendsen–Wang chain.
//!
//! The FK weight of `ω` under the plus-wired convention is
//!
//! ```text
//! ∏_e p^{ω_e} (1−p)^{1−ω_e} · ∏_{C ≠ C*} 2cosh(ε h_C / T) · exp(ε h_{C*} / T)
//! ```
//!
//! with `p = 1 − e^{−2/T}` and `C*` the cluster of the ghost vertex.
//! Minus boundary conditions are handled by the spin-flip reduction
//! `μ⁻_{εh}(σ) = μ⁺_{−εh}(−σ)`.

pub mod exact;
pub mod snapshot;

use rand::Rng;

use crate::exactgibbs::{BoundaryCondition, GibbsError, SpinConfig, Temperature};
use crate::graph::Graph;
use crate::math::{log_2cosh, plus_probability};
use crate::unionfind::UnionFind;

/// `p = 1 − e^{−2/T}`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct EdgeProbability(f64);

impl EdgeProbability {
    pub fn from_temperature(t: Temperature) -> Self {
        EdgeProbability(-(-2.0 / t.value()).exp_m1())
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `ln p` and `ln(1 − p)`.
    pub fn logs(self, t: Temperature) -> (f64, f64) {
        (self.0.ln(), -2.0 / t.value())
    }
}

pub fn temperature_to_p(t: f64) -> Result<EdgeProbability, GibbsError> {
    Ok(EdgeProbability::from_temperature(Temperature::new(t)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BondConfig {
    open: Vec<bool>,
}

impl BondConfig {
    pub fn closed(graph: &Graph) -> Self {
        BondConfig {
            open: vec![false; graph.n_bonds()],
        }
    }

    pub fn open(graph: &Graph) -> Self {
        BondConfig {
            open: vec![true; graph.n_bonds()],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BondConfig { open: bits }
    }

    /// Bit `b` of `mask` set means bond `b` is open.
    pub fn from_mask(n_bonds: usize, mask: u64) -> Self {
        BondConfig {
            open: (0..n_bonds).map(|b| mask >> b & 1 == 1).collect(),
        }
    }

    pub fn mask(&self) -> u64 {
        self.open
            .iter()
            .enumerate()
            .fold(0, |m, (b, &o)| if o { m | 1 << b } else { m })
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    #[inline]
    pub fn is_open(&self, b: usize) -> bool {
        self.open[b]
    }

    pub fn set(&mut self, b: usize, open: bool) {
        self.open[b] = open;
    }

    pub fn bits(&self) -> &[bool] {
        &self.open
    }

    pub fn count_open(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }
}

/// Open clusters of `ω`, the ghost included as a vertex.
#[derive(Clone, Debug, Default)]
pub struct ClusterLabeling {
    labels: Vec<u32>,
    n_clusters: usize,
    ghost_cluster: u32,
    origin_cluster: u32,
    field_sums: Vec<f64>,
    sizes: Vec<u32>,
    uf: Option<UnionFind>,
    scratch: Vec<u32>,
}

impl ClusterLabeling {
    pub fn new() -> Self {
        Self::default()
    }

    /// Relabels in place for `ω`; `h` holds unscaled field values.
    pub fn compute(&mut self, graph: &Graph, bonds: &BondConfig, h: &[f64]) {
        let nv = graph.n_sites() + 1;
        let uf = self.uf.get_or_insert_with(|| UnionFind::new(nv));
        uf.reset(nv);
        for b in 0..graph.n_bonds() {
            if bonds.is_open(b) {
                let (u, v) = graph.bond_endpoints(b);
                uf.union(u, v);
            }
        }
        self.n_clusters = uf.labels_into(&mut self.labels, &mut self.scratch);
        self.field_sums.clear();
        self.field_sums.resize(self.n_clusters, 0.0);
        self.sizes.clear();
        self.sizes.resize(self.n_clusters, 0);
        for (v, &l) in self.labels.iter().enumerate() {
            self.sizes[l as usize] += 1;
            if v < graph.n_sites() {
                self.field_sums[l as usize] += h[v];
            }
        }
        self.ghost_cluster = self.labels[graph.ghost()];
        self.origin_cluster = self.labels[graph.origin()];
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v] as usize
    }

    /// `η`, the number of clusters (the ghost cluster included).
    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn ghost_cluster(&self) -> usize {
        self.ghost_cluster as usize
    }

    pub fn origin_cluster(&self) -> usize {
        self.origin_cluster as usize
    }

    /// `s = 1` iff the origin is joined to the ghost.
    pub fn origin_wired(&self) -> bool {
        self.ghost_cluster == self.origin_cluster
    }

    /// Unscaled `h_C`.
    pub fn field_sum(&self, c: usize) -> f64 {
        self.field_sums[c]
    }

    pub fn field_sums(&self) -> &[f64] {
        &self.field_sums
    }

    /// Vertex count of cluster `c`, the ghost counting as one vertex.
    pub fn size(&self, c: usize) -> usize {
        self.sizes[c] as usize
    }
}

pub fn find_clusters(graph: &Graph, bonds: &BondConfig, h: &[f64]) -> ClusterLabeling {
    let mut labeling = ClusterLabeling::new();
    labeling.compute(graph, bonds, h);
    labeling
}

/// Log of the unnormalised FK weight with field, plus-wired.
pub fn fk_log_weight(graph: &Graph, bonds: &BondConfig, h: &[f64], eps: f64, t: Temperature) -> f64 {
    let labeling = find_clusters(graph, bonds, h);
    fk_log_weight_with_labeling(graph, bonds, &labeling, eps, t)
}

pub fn fk_log_weight_with_labeling(
    graph: &Graph,
    bonds: &BondConfig,
    labeling: &ClusterLabeling,
    eps: f64,
    t: Temperature,
) -> f64 {
    let (log_p, log_q) = EdgeProbability::from_temperature(t).logs(t);
    let open = bonds.count_open() as f64;
    let closed = graph.n_bonds() as f64 - open;
    let mut acc = open * log_p + closed * log_q;
    let beta = 1.0 / t.value();
    for c in 0..labeling.n_clusters() {
        let x = eps * labeling.field_sum(c) * beta;
        acc += if c == labeling.ghost_cluster() { x } else { log_2cosh(x) };
    }
    acc
}

/// `P(ω_e = 1 | σ)`: `p` on agreeing edges, 0 otherwise.
#[inline]
pub fn bond_open_probability(su: i8, sv: i8, p: EdgeProbability) -> f64 {
    if su == sv {
        p.value()
    } else {
        0.0
    }
}

/// `P(σ_C = +1 | ω)` for a cluster other than `C*`.
#[inline]
pub fn cluster_plus_probability(eps_h_c: f64, t: Temperature) -> f64 {
    plus_probability(eps_h_c / t.value())
}

/// Spin of vertex `v`, reading the ghost as the boundary spin.
#[inline]
fn vertex_spin(graph: &Graph, sigma: &[i8], bc: BoundaryCondition, v: usize) -> i8 {
    if v == graph.ghost() {
        bc.sign()
    } else {
        sigma[v]
    }
}

/// Fills `out` with a draw from `π_h(ω | σ)`. One uniform is consumed per
/// agreeing bond, in bond order.
pub fn fill_bonds_given_spins<R: Rng + ?Sized>(
    graph: &Graph,
    sigma: &SpinConfig,
    bc: BoundaryCondition,
    p: EdgeProbability,
    out: &mut BondConfig,
    rng: &mut R,
) {
    out.open.resize(graph.n_bonds(), false);
    let s = sigma.spins();
    for b in 0..graph.n_bonds() {
        let (u, v) = graph.bond_endpoints(b);
        out.open[b] = vertex_spin(graph, s, bc, u) == vertex_spin(graph, s, bc, v) && rng.random::<f64>() < p.value();
    }
}

pub fn sample_bonds_given_spins<R: Rng + ?Sized>(
    graph: &Graph,
    sigma: &SpinConfig,
    bc: BoundaryCondition,
    p: EdgeProbability,
    rng: &mut R,
) -> BondConfig {
    let mut out = BondConfig::closed(graph);
    fill_bonds_given_spins(graph, sigma, bc, p, &mut out, rng);
    out
}

/// Writes a draw from `π_h(σ | ω)` given the labeling of `ω`. One uniform
/// is consumed per cluster other than `C*`, in cluster order.
pub fn fill_spins_given_clusters<R: Rng + ?Sized>(
    labeling: &ClusterLabeling,
    eps: f64,
    t: Temperature,
    bc: BoundaryCondition,
    cluster_spin: &mut Vec<i8>,
    sigma: &mut SpinConfig,
    rng: &mut R,
) {
    cluster_spin.clear();
    for c in 0..labeling.n_clusters() {
        let s = if c == labeling.ghost_cluster() {
            bc.sign()
        } else if rng.random::<f64>() < cluster_plus_probability(eps * labeling.field_sum(c), t) {
            1
        } else {
            -1
        };
        cluster_spin.push(s);
    }
    for (v, s) in sigma.spins_mut().iter_mut().enumerate() {
        *s = cluster_spin[labeling.label(v)];
    }
}

pub fn sample_spins_given_bonds<R: Rng + ?Sized>(
    graph: &Graph,
    bonds: &BondConfig,
    h: &[f64],
    eps: f64,
    t: Temperature,
    bc: BoundaryCondition,
    rng: &mut R,
) -> SpinConfig {
    let labeling = find_clusters(graph, bonds, h);
    let mut sigma = SpinConfig::uniform(graph.n_sites(), 1);
    fill_spins_given_clusters(&labeling, eps, t, bc, &mut Vec::new(), &mut sigma, rng);
    sigma
}

/// One Swendsen–Wang update leaving `μ^{bc}_{T,εh}` invariant. Minus
/// boundary conditions go through the spin-flip reduction.
pub fn sw_step<R: Rng + ?Sized>(
    graph: &Graph,
    sigma: &SpinConfig,
    h: &[f64],
    eps: f64,
    t: Temperature,
    bc: BoundaryCondition,
    rng: &mut R,
) -> SpinConfig {
    match bc {
        BoundaryCondition::Plus => {
            let p = EdgeProbability::from_temperature(t);
            let bonds = sample_bonds_given_spins(graph, sigma, BoundaryCondition::Plus, p, rng);
            sample_spins_given_bonds(graph, &bonds, h, eps, t, BoundaryCondition::Plus, rng)
        }
        BoundaryCondition::Minus => {
            let neg: Vec<f64> = h.iter().map(|x| -x).collect();
            sw_step(graph, &sigma.flipped(), &neg, eps, t, BoundaryCondition::Plus, rng).flipped()
        }
    }
}

/// `exp(−εh_{C_o}/T) / 2cosh(εh_{C_o}/T)` if `C_o ≠ C*`, else 0. Under plus
/// boundary conditions its FK expectation is `μ⁺(σ_o = −1)`.
pub fn rao_blackwell_minus_prob(labeling: &ClusterLabeling, eps: f64, t: Temperature) -> f64 {
    if labeling.origin_wired() {
        0.0
    } else {
        1.0 - cluster_plus_probability(eps * labeling.field_sum(labeling.origin_cluster()), t)
    }
}

/// A plus-wired Swendsen–Wang chain with reusable buffers. After each
/// [`SwChain::step`] the stored bonds and labeling are those the new spins
/// were drawn from, so FK observables can be read alongside spins.
pub struct SwChain<'g, R> {
    graph: &'g Graph,
    h: Vec<f64>,
    eps: f64,
    t: Temperature,
    p: EdgeProbability,
    sigma: SpinConfig,
    bonds: BondConfig,
    labeling: ClusterLabeling,
    cluster_spin: Vec<i8>,
    rng: R,
}

impl<'g, R: Rng> SwChain<'g, R> {
    pub fn new(graph: &'g Graph, h: Vec<f64>, eps: f64, t: Temperature, initial: SpinConfig, rng: R) -> Self {
        assert_eq!(h.len(), graph.n_sites());
        assert_eq!(initial.len(), graph.n_sites());
        let mut chain = SwChain {
            graph,
            h,
            eps,
            t,
            p: EdgeProbability::from_temperature(t),
            sigma: initial,
            bonds: BondConfig::closed(graph),
            labeling: ClusterLabeling::new(),
            cluster_spin: Vec::new(),
            rng,
        };
        chain.labeling.compute(graph, &chain.bonds, &chain.h);
        chain
    }

    pub fn step(&mut self) {
        fill_bonds_given_spins(
            self.graph,
            &self.sigma,
            BoundaryCondition::Plus,
            self.p,
            &mut self.bonds,
            &mut self.rng,
        );
        self.labeling.compute(self.graph, &self.bonds, &self.h);
        fill_spins_given_clusters(
            &self.labeling,
            self.eps,
            self.t,
            BoundaryCondition::Plus,
            &mut self.cluster_spin,
            &mut self.sigma,
            &mut self.rng,
        );
    }

    pub fn spins(&self) -> &SpinConfig {
        &self.sigma
    }

    pub fn bonds(&self) -> &BondConfig {
        &self.bonds
    }

    pub fn labeling(&self) -> &ClusterLabeling {
        &self.labeling
    }

    pub fn field(&self) -> &[f64] {
        &self.h
    }

    pub fn rao_blackwell_minus_prob(&self) -> f64 {
        rao_blackwell_minus_prob(&self.labeling, self.eps, self.t)
    }

    pub fn magnetization(&self) -> f64 {
        let s = self.sigma.spins();
        s.iter().map(|&x| x as f64).sum::<f64>() / s.len() as f64
    }
}
