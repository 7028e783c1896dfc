//! The Ising side of the model: Hamiltonian, exhaustive enumeration and a
//! heat-bath sampler.
//!
//! With boundary condition `±`, the Hamiltonian on a [`Graph`] is
//!
//! ```text
//! H(σ) = −( Σ_{uv internal} σ_u σ_v  ±  Σ_{ghost edges at u} σ_u  +  ε Σ_u h_u σ_u )
//! ```
//!
//! and the Gibbs measure is proportional to `exp(−H/T)`.

use rand::Rng;

use crate::graph::Graph;
use crate::math::{plus_probability, LogSumExp};

/// Largest site count accepted by the exhaustive enumerators.
pub const ENUMERATION_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GibbsError {
    #[error("temperature must be positive and finite, got {0}")]
    BadTemperature(f64),
    #[error("{sites} sites exceed the enumeration cap of {cap}")]
    TooLarge { sites: usize, cap: usize },
    #[error("field has {found} values, graph has {expected} sites")]
    FieldLength { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum BoundaryCondition {
    Plus,
    Minus,
}

impl BoundaryCondition {
    pub fn sign(self) -> i8 {
        match self {
            BoundaryCondition::Plus => 1,
            BoundaryCondition::Minus => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            BoundaryCondition::Plus => BoundaryCondition::Minus,
            BoundaryCondition::Minus => BoundaryCondition::Plus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
pub struct Temperature(f64);

impl Temperature {
    pub fn new(t: f64) -> Result<Self, GibbsError> {
        if t.is_finite() && t > 0.0 {
            Ok(Temperature(t))
        } else {
            Err(GibbsError::BadTemperature(t))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    spins: Vec<i8>,
}

impl SpinConfig {
    pub fn uniform(n: usize, spin: i8) -> Self {
        assert!(spin == 1 || spin == -1);
        SpinConfig { spins: vec![spin; n] }
    }

    pub fn from_spins(spins: Vec<i8>) -> Self {
        assert!(spins.iter().all(|&s| s == 1 || s == -1), "spins must be ±1");
        SpinConfig { spins }
    }

    /// Bit `i` of `mask` set means `σ_i = +1`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        SpinConfig {
            spins: (0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect(),
        }
    }

    pub fn mask(&self) -> u64 {
        self.spins
            .iter()
            .enumerate()
            .fold(0, |m, (i, &s)| if s == 1 { m | 1 << i } else { m })
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn spins_mut(&mut self) -> &mut [i8] {
        &mut self.spins
    }

    pub fn get(&self, i: usize) -> i8 {
        self.spins[i]
    }

    pub fn set(&mut self, i: usize, s: i8) {
        assert!(s == 1 || s == -1);
        self.spins[i] = s;
    }

    pub fn flip_all(&mut self) {
        self.spins.iter_mut().for_each(|s| *s = -*s);
    }

    pub fn flipped(&self) -> SpinConfig {
        let mut out = self.clone();
        out.flip_all();
        out
    }
}

fn check_field(graph: &Graph, h: &[f64]) -> Result<(), GibbsError> {
    if h.len() != graph.n_sites() {
        return Err(GibbsError::FieldLength {
            expected: graph.n_sites(),
            found: h.len(),
        });
    }
    Ok(())
}

pub fn hamiltonian(graph: &Graph, sigma: &SpinConfig, bc: BoundaryCondition, h: &[f64], eps: f64) -> f64 {
    let s = sigma.spins();
    let mut coupling = 0i64;
    for &[u, v] in graph.edges() {
        coupling += (s[u as usize] * s[v as usize]) as i64;
    }
    let mut boundary = 0i64;
    for &u in graph.ghost_edges() {
        boundary += s[u as usize] as i64;
    }
    let field: f64 = s.iter().zip(h).map(|(&si, &hi)| si as f64 * hi).sum();
    -(coupling as f64 + bc.sign() as f64 * boundary as f64 + eps * field)
}

/// Local field at `v`: neighbouring spins (the ghost reads the boundary
/// spin) plus `ε h_v`.
#[inline]
fn local_field(graph: &Graph, spins: &[i8], bc: BoundaryCondition, h: &[f64], eps: f64, v: usize) -> f64 {
    let ghost = graph.ghost();
    let mut acc = 0i32;
    for &(w, _) in graph.incident(v) {
        let w = w as usize;
        acc += if w == ghost { bc.sign() } else { spins[w] } as i32;
    }
    acc as f64 + eps * h[v]
}

/// Visits every spin configuration in Gray-code order with its
/// unnormalised log weight `−H/T`. The visitor sees the spin mask and spins.
pub fn enumerate_log_weights(
    graph: &Graph,
    bc: BoundaryCondition,
    h: &[f64],
    eps: f64,
    t: Temperature,
    mut visit: impl FnMut(u64, &[i8], f64),
) -> Result<(), GibbsError> {
    check_field(graph, h)?;
    let n = graph.n_sites();
    if n > ENUMERATION_CAP {
        return Err(GibbsError::TooLarge {
            sites: n,
            cap: ENUMERATION_CAP,
        });
    }
    let beta = 1.0 / t.value();
    let mut sigma = SpinConfig::uniform(n, -1);
    let mut energy = hamiltonian(graph, &sigma, bc, h, eps);
    let mut mask = 0u64;
    visit(mask, sigma.spins(), -beta * energy);
    for step in 1u64..(1u64 << n) {
        let v = step.trailing_zeros() as usize;
        let s = sigma.spins()[v];
        // flipping σ_v changes H by 2 σ_v (local field)
        energy += 2.0 * s as f64 * local_field(graph, sigma.spins(), bc, h, eps, v);
        sigma.spins_mut()[v] = -s;
        mask ^= 1 << v;
        visit(mask, sigma.spins(), -beta * energy);
    }
    Ok(())
}

/// `ln Z = ln Σ_σ exp(−H(σ)/T)`.
pub fn partition_function(
    graph: &Graph,
    bc: BoundaryCondition,
    h: &[f64],
    eps: f64,
    t: Temperature,
) -> Result<f64, GibbsError> {
    let mut acc = LogSumExp::new();
    enumerate_log_weights(graph, bc, h, eps, t, |_, _, lw| acc.push(lw))?;
    Ok(acc.value())
}

/// `μ^{bc}(σ_site = +1)`.
pub fn exact_spin_marginal(
    graph: &Graph,
    bc: BoundaryCondition,
    h: &[f64],
    eps: f64,
    t: Temperature,
    site: usize,
) -> Result<f64, GibbsError> {
    let mut plus = LogSumExp::new();
    let mut all = LogSumExp::new();
    enumerate_log_weights(graph, bc, h, eps, t, |_, s, lw| {
        all.push(lw);
        if s[site] == 1 {
            plus.push(lw);
        }
    })?;
    Ok((plus.value() - all.value()).exp())
}

/// `m = μ⁺(σ_o = 1) − μ⁻(σ_o = 1)` at the graph origin.
pub fn exact_boundary_influence(graph: &Graph, h: &[f64], eps: f64, t: Temperature) -> Result<f64, GibbsError> {
    let o = graph.origin();
    let plus = exact_spin_marginal(graph, BoundaryCondition::Plus, h, eps, t, o)?;
    let minus = exact_spin_marginal(graph, BoundaryCondition::Minus, h, eps, t, o)?;
    Ok(plus - minus)
}

/// The normalised Gibbs law indexed by spin mask.
pub fn gibbs_distribution(
    graph: &Graph,
    bc: BoundaryCondition,
    h: &[f64],
    eps: f64,
    t: Temperature,
) -> Result<Vec<f64>, GibbsError> {
    let n = graph.n_sites();
    if n > 20 {
        return Err(GibbsError::TooLarge { sites: n, cap: 20 });
    }
    let mut logw = vec![f64::NEG_INFINITY; 1 << n];
    enumerate_log_weights(graph, bc, h, eps, t, |m, _, lw| logw[m as usize] = lw)?;
    let log_z = crate::math::log_sum_exp(&logw);
    Ok(logw.into_iter().map(|lw| (lw - log_z).exp()).collect())
}

/// Probability that the heat-bath update sets `σ_v = +1`.
pub fn heat_bath_plus_probability(
    graph: &Graph,
    sigma: &SpinConfig,
    bc: BoundaryCondition,
    h: &[f64],
    eps: f64,
    t: Temperature,
    v: usize,
) -> f64 {
    plus_probability(local_field(graph, sigma.spins(), bc, h, eps, v) / t.value())
}

/// One heat-bath update at a uniformly chosen site.
pub fn glauber_step<R: Rng + ?Sized>(
    graph: &Graph,
    sigma: &mut SpinConfig,
    bc: BoundaryCondition,
    h: &[f64],
    eps: f64,
    t: Temperature,
    rng: &mut R,
) {
    let v = rng.random_range(0..graph.n_sites());
    let p = heat_bath_plus_probability(graph, sigma, bc, h, eps, t, v);
    sigma.spins_mut()[v] = if rng.random::<f64>() < p { 1 } else { -1 };
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{fixtures, LatticeGraph, Wiring};
    use crate::lattice::Region;

    fn t(x: f64) -> Temperature {
        Temperature::new(x).unwrap()
    }

    #[test]
    fn hamiltonian_on_lambda1() {
        let lg = LatticeGraph::new(Region::new(1).unwrap(), Wiring::Wired);
        let g = lg.graph();
        let h = vec![0.0; 27];
        let mut sigma = SpinConfig::uniform(27, 1);
        assert_eq!(hamiltonian(g, &sigma, BoundaryCondition::Plus, &h, 0.0), -108.0);
        sigma.set(g.origin(), -1);
        assert_eq!(hamiltonian(g, &sigma, BoundaryCondition::Plus, &h, 0.0), -96.0);
    }

    #[test]
    fn single_site_closed_forms() {
        let g = fixtures::single_site();
        let sigma = SpinConfig::uniform(1, 1);
        assert_eq!(
            hamiltonian(&g, &sigma, BoundaryCondition::Plus, &[0.7], 0.5),
            -(6.0 + 0.35)
        );
        let z = partition_function(&g, BoundaryCondition::Plus, &[0.0], 0.0, t(2.0)).unwrap();
        assert!((z - (3f64.exp() + (-3f64).exp()).ln()).abs() < 1e-14);
        let p = exact_spin_marginal(&g, BoundaryCondition::Plus, &[0.0], 0.0, t(2.0), 0).unwrap();
        assert!((p - 0.997527).abs() < 1e-6);
        let m = exact_boundary_influence(&g, &[0.0], 0.0, t(2.0)).unwrap();
        assert!((m - 0.995055).abs() < 1e-6);
        assert!((m - 3f64.tanh()).abs() < 1e-14);
    }

    #[test]
    fn enumeration_refuses_large_graphs() {
        let lg = LatticeGraph::new(Region::new(1).unwrap(), Wiring::Wired);
        let err = partition_function(lg.graph(), BoundaryCondition::Plus, &[0.0; 27], 0.0, t(1.0)).unwrap_err();
        assert_eq!(err, GibbsError::TooLarge { sites: 27, cap: 24 });
        assert!(Temperature::new(0.0).is_err());
    }

    #[test]
    fn high_temperature_limit() {
        let g = fixtures::cube_corner_wired();
        let h = crate::disorder::gaussian_values(8, 4);
        let z = partition_function(&g, BoundaryCondition::Plus, &h, 0.3, t(1e9)).unwrap();
        assert!((z - 8.0 * std::f64::consts::LN_2).abs() < 1e-6);
        let m = exact_boundary_influence(&g, &h, 0.0, t(1e9)).unwrap();
        assert!(m.abs() < 1e-8);
    }

    #[test]
    fn glauber_kernel_on_single_site_is_reversible() {
        let g = fixtures::single_site();
        let tt = t(2.0);
        let h = [0.4];
        let up = heat_bath_plus_probability(&g, &SpinConfig::uniform(1, -1), BoundaryCondition::Plus, &h, 0.5, tt, 0);
        let stay_up =
            heat_bath_plus_probability(&g, &SpinConfig::uniform(1, 1), BoundaryCondition::Plus, &h, 0.5, tt, 0);
        let pi_plus = exact_spin_marginal(&g, BoundaryCondition::Plus, &h, 0.5, tt, 0).unwrap();
        // heat bath does not depend on the current spin at the updated site
        assert_eq!(up, stay_up);
        assert!((pi_plus * (1.0 - up) - (1.0 - pi_plus) * up).abs() < 1e-15);
    }
}
