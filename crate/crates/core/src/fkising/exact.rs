//! Exhaustive oracles on small graphs: the joint Edwards–Sokal law, FK
//! enumeration and the exact Swendsen–Wang transition matrix.

use super::{
    bond_open_probability, cluster_plus_probability, find_clusters, fk_log_weight_with_labeling, BondConfig,
    ClusterLabeling, EdgeProbability,
};
use crate::exactgibbs::{BoundaryCondition, GibbsError, Temperature};
use crate::graph::Graph;
use crate::math::LogSumExp;

/// Largest `|sites| + |bonds|` accepted by [`joint_es_enumeration`].
pub const JOINT_CAP: usize = 26;
/// Largest bond count accepted by [`fk_enumerate`].
pub const FK_CAP: usize = 24;

/// Normalised `π_h(σ, ω)` indexed by `σ_mask << n_bonds | ω_mask`.
#[derive(Clone, Debug)]
pub struct JointTable {
    n_sites: usize,
    n_bonds: usize,
    log_z: f64,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_bonds(&self) -> usize {
        self.n_bonds
    }

    /// Log of the unnormalised total weight `Z_{π_h}`.
    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn prob(&self, sigma_mask: u64, omega_mask: u64) -> f64 {
        self.probs[((sigma_mask as usize) << self.n_bonds) | omega_mask as usize]
    }

    pub fn spin_marginal(&self) -> Vec<f64> {
        let nb = 1usize << self.n_bonds;
        self.probs.chunks(nb).map(|row| row.iter().sum()).collect()
    }

    pub fn bond_marginal(&self) -> Vec<f64> {
        let nb = 1usize << self.n_bonds;
        let mut out = vec![0.0; nb];
        for row in self.probs.chunks(nb) {
            for (o, p) in out.iter_mut().zip(row) {
                *o += p;
            }
        }
        out
    }

    /// `π_h(· | σ)` over bond masks.
    pub fn bonds_given_spins(&self, sigma_mask: u64) -> Vec<f64> {
        let nb = 1usize << self.n_bonds;
        let row = &self.probs[(sigma_mask as usize) * nb..(sigma_mask as usize + 1) * nb];
        let total: f64 = row.iter().sum();
        row.iter().map(|p| p / total).collect()
    }

    /// `π_h(· | ω)` over spin masks.
    pub fn spins_given_bonds(&self, omega_mask: u64) -> Vec<f64> {
        let col: Vec<f64> = (0..1u64 << self.n_sites).map(|s| self.prob(s, omega_mask)).collect();
        let total: f64 = col.iter().sum();
        col.iter().map(|p| p / total).collect()
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

/// Agreement mask of `σ` over bonds, the ghost reading the boundary spin.
fn agreeing_bonds(graph: &Graph, sigma_mask: u64, bc: BoundaryCondition) -> u64 {
    let spin = |v: usize| -> bool {
        if v == graph.ghost() {
            bc == BoundaryCondition::Plus
        } else {
            sigma_mask >> v & 1 == 1
        }
    };
    (0..graph.n_bonds()).fold(0, |m, b| {
        let (u, v) = graph.bond_endpoints(b);
        if spin(u) == spin(v) {
            m | 1 << b
        } else {
            m
        }
    })
}

/// The joint law `π_h(σ, ω) ∝ ∏_e [(1−p) 1{ω_e=0} + p 1{ω_e=1} 1{σ agrees on e}] · exp(ε Σ h_u σ_u / T)`
/// with the ghost spin fixed to the boundary spin.
pub fn joint_es_enumeration(
    graph: &Graph,
    bc: BoundaryCondition,
    h: &[f64],
    eps: f64,
    t: Temperature,
) -> Result<JointTable, GibbsError> {
    check_field(graph, h)?;
    let (n, m) = (graph.n_sites(), graph.n_bonds());
    if n + m > JOINT_CAP {
        return Err(GibbsError::TooLarge {
            sites: n + m,
            cap: JOINT_CAP,
        });
    }
    let (log_p, log_q) = EdgeProbability::from_temperature(t).logs(t);
    let beta = 1.0 / t.value();
    let mut logw = vec![f64::NEG_INFINITY; 1 << (n + m)];
    let mut acc = LogSumExp::new();
    for s in 0..1u64 << n {
        let field: f64 = (0..n).map(|v| if s >> v & 1 == 1 { h[v] } else { -h[v] }).sum();
        let base = eps * field * beta;
        let agree = agreeing_bonds(graph, s, bc);
        // iterate over subsets of the agreeing bonds
        let mut w = agree;
        loop {
            let k = w.count_ones() as f64;
            let lw = base + k * log_p + (m as f64 - k) * log_q;
            logw[((s as usize) << m) | w as usize] = lw;
            acc.push(lw);
            if w == 0 {
                break;
            }
            w = (w - 1) & agree;
        }
    }
    let log_z = acc.value();
    let probs = logw.into_iter().map(|lw| (lw - log_z).exp()).collect();
    Ok(JointTable {
        n_sites: n,
        n_bonds: m,
        log_z,
        probs,
    })
}

/// Visits every bond configuration with its labeling and plus-wired FK log
/// weight.
pub fn fk_enumerate(
    graph: &Graph,
    h: &[f64],
    eps: f64,
    t: Temperature,
    mut visit: impl FnMut(u64, &ClusterLabeling, f64),
) -> Result<(), GibbsError> {
    check_field(graph, h)?;
    let m = graph.n_bonds();
    if m > FK_CAP {
        return Err(GibbsError::TooLarge { sites: m, cap: FK_CAP });
    }
    let mut labeling = ClusterLabeling::new();
    for w in 0..1u64 << m {
        let bonds = BondConfig::from_mask(m, w);
        labeling.compute(graph, &bonds, h);
        let lw = fk_log_weight_with_labeling(graph, &bonds, &labeling, eps, t);
        visit(w, &labeling, lw);
    }
    Ok(())
}

/// `ln Σ_ω w(ω)` for the plus-wired FK weight with field.
pub fn fk_log_partition(graph: &Graph, h: &[f64], eps: f64, t: Temperature) -> Result<f64, GibbsError> {
    let mut acc = LogSumExp::new();
    fk_enumerate(graph, h, eps, t, |_, _, lw| acc.push(lw))?;
    Ok(acc.value())
}

/// Normalised FK law over bond masks.
pub fn fk_distribution(graph: &Graph, h: &[f64], eps: f64, t: Temperature) -> Result<Vec<f64>, GibbsError> {
    let mut logw = Vec::with_capacity(1 << graph.n_bonds());
    fk_enumerate(graph, h, eps, t, |_, _, lw| logw.push(lw))?;
    let log_z = crate::math::log_sum_exp(&logw);
    Ok(logw.into_iter().map(|lw| (lw - log_z).exp()).collect())
}

/// `E_φ[f(labeling)]` under the plus-wired FK law.
pub fn fk_expectation(
    graph: &Graph,
    h: &[f64],
    eps: f64,
    t: Temperature,
    f: impl Fn(&ClusterLabeling) -> f64,
) -> Result<f64, GibbsError> {
    let mut logw = Vec::with_capacity(1 << graph.n_bonds());
    let mut values = Vec::with_capacity(1 << graph.n_bonds());
    fk_enumerate(graph, h, eps, t, |_, lab, lw| {
        logw.push(lw);
        values.push(f(lab));
    })?;
    let log_z = crate::math::log_sum_exp(&logw);
    Ok(logw.iter().zip(&values).map(|(lw, v)| (lw - log_z).exp() * v).sum())
}

/// Exact Swendsen–Wang transition matrix `K[σ][σ']` under plus boundary
/// conditions, built from the same conditional probabilities the sampler
/// uses.
pub fn sw_kernel_exact(graph: &Graph, h: &[f64], eps: f64, t: Temperature) -> Result<Vec<Vec<f64>>, GibbsError> {
    check_field(graph, h)?;
    let (n, m) = (graph.n_sites(), graph.n_bonds());
    if n > 12 || m > FK_CAP {
        return Err(GibbsError::TooLarge {
            sites: n.max(m),
            cap: 12,
        });
    }
    let p = EdgeProbability::from_temperature(t);
    let bc = BoundaryCondition::Plus;
    let mut kernel = vec![vec![0.0; 1 << n]; 1 << n];
    let mut labeling = ClusterLabeling::new();
    for s in 0..1u64 << n {
        let agree = agreeing_bonds(graph, s, bc);
        let spin = |v: usize| if v == graph.ghost() || s >> v & 1 == 1 { 1i8 } else { -1 };
        let mut w = agree;
        loop {
            let bonds = BondConfig::from_mask(m, w);
            let mut pw = 1.0;
            for b in 0..m {
                let (u, v) = graph.bond_endpoints(b);
                let q = bond_open_probability(spin(u), spin(v), p);
                pw *= if bonds.is_open(b) { q } else { 1.0 - q };
            }
            if pw > 0.0 {
                labeling.compute(graph, &bonds, h);
                spread_cluster_spins(graph, &labeling, eps, t, pw, &mut kernel[s as usize]);
            }
            if w == 0 {
                break;
            }
            w = (w - 1) & agree;
        }
    }
    Ok(kernel)
}

fn spread_cluster_spins(
    graph: &Graph,
    labeling: &ClusterLabeling,
    eps: f64,
    t: Temperature,
    weight: f64,
    row: &mut [f64],
) {
    let free: Vec<usize> = (0..labeling.n_clusters())
        .filter(|&c| c != labeling.ghost_cluster())
        .collect();
    let plus: Vec<f64> = free
        .iter()
        .map(|&c| cluster_plus_probability(eps * labeling.field_sum(c), t))
        .collect();
    let mut cluster_up = vec![true; labeling.n_clusters()];
    for choice in 0..1u64 << free.len() {
        let mut pr = weight;
        for (i, &c) in free.iter().enumerate() {
            let up = choice >> i & 1 == 1;
            cluster_up[c] = up;
            pr *= if up { plus[i] } else { 1.0 - plus[i] };
        }
        let mask = (0..graph.n_sites()).fold(0u64, |acc, v| {
            if cluster_up[labeling.label(v)] {
                acc | 1 << v
            } else {
                acc
            }
        });
        row[mask as usize] += pr;
    }
}

/// `½ Σ |a_i − b_i|`.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// `μK` for a row-stochastic `K`.
pub fn apply_kernel(mu: &[f64], kernel: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; mu.len()];
    for (m, row) in mu.iter().zip(kernel) {
        for (o, k) in out.iter_mut().zip(row) {
            *o += m * k;
        }
    }
    out
}

/// Labeling helper for tests and diagnostics.
pub fn labeling_of_mask(graph: &Graph, omega_mask: u64, h: &[f64]) -> ClusterLabeling {
    find_clusters(graph, &BondConfig::from_mask(graph.n_bonds(), omega_mask), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::gaussian_values;
    use crate::exactgibbs::{gibbs_distribution, partition_function};
    use crate::fkising::rao_blackwell_minus_prob;
    use crate::graph::fixtures;

    fn t(x: f64) -> Temperature {
        Temperature::new(x).unwrap()
    }

    #[test]
    fn joint_marginals_on_the_ladder() {
        let g = fixtures::ladder();
        let h = gaussian_values(6, 17);
        let (eps, tt) = (0.6, t(2.5));
        let table = joint_es_enumeration(&g, BoundaryCondition::Plus, &h, eps, tt).unwrap();
        let mu = gibbs_distribution(&g, BoundaryCondition::Plus, &h, eps, tt).unwrap();
        assert!(total_variation(&table.spin_marginal(), &mu) < 1e-12);
        let phi = fk_distribution(&g, &h, eps, tt).unwrap();
        assert!(total_variation(&table.bond_marginal(), &phi) < 1e-12);
        let log_zmu = partition_function(&g, BoundaryCondition::Plus, &h, eps, tt).unwrap();
        assert!((table.log_z() - (log_zmu - g.n_bonds() as f64 / tt.value())).abs() < 1e-10);
    }

    #[test]
    fn rao_blackwell_identity_on_the_cube() {
        let g = fixtures::cube_corner_wired();
        let h = gaussian_values(8, 2);
        let (eps, tt) = (0.4, t(3.0));
        let rb = fk_expectation(&g, &h, eps, tt, |lab| rao_blackwell_minus_prob(lab, eps, tt)).unwrap();
        let plus = crate::exactgibbs::exact_spin_marginal(&g, BoundaryCondition::Plus, &h, eps, tt, 0).unwrap();
        assert!((rb - (1.0 - plus)).abs() < 1e-12);
    }

    #[test]
    fn sw_kernel_is_stochastic_and_stationary() {
        let g = fixtures::ladder();
        let h = gaussian_values(6, 23);
        let (eps, tt) = (0.9, t(1.8));
        let k = sw_kernel_exact(&g, &h, eps, tt).unwrap();
        for row in &k {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let mu = gibbs_distribution(&g, BoundaryCondition::Plus, &h, eps, tt).unwrap();
        assert!(total_variation(&apply_kernel(&mu, &k), &mu) < 1e-12);
    }
}
