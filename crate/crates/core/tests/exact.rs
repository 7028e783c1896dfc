mod common;

use proptest::prelude::*;
use rfim_core::disorder::gaussian_values;
use rfim_core::exactgibbs::{
    exact_boundary_influence, exact_spin_marginal, gibbs_distribution, hamiltonian, BoundaryCondition, SpinConfig,
    Temperature,
};
use rfim_core::fkising::exact::{fk_distribution, fk_expectation, joint_es_enumeration, sw_kernel_exact};
use rfim_core::fkising::snapshot::BondSnapshot;
use rfim_core::fkising::{find_clusters, rao_blackwell_minus_prob, BondConfig};
use rfim_core::graph::{fixtures, LatticeGraph, Wiring};
use rfim_core::lattice::Region;

use BoundaryCondition::{Minus, Plus};

fn temp(t: f64) -> Temperature {
    Temperature::new(t).unwrap()
}

#[test]
fn gibbs_law_matches_direct_enumeration() {
    for f in fixtures::standard() {
        let g = &f.graph;
        let h = gaussian_values(g.n_sites(), 5);
        for (bc, sign) in [(Plus, 1), (Minus, -1)] {
            let lib = gibbs_distribution(g, bc, &h, 0.4, temp(1.7)).unwrap();
            let oracle = common::ising_law(g, sign, &h, 0.4, 1.7);
            assert!(common::tv(&lib, &oracle) <= 1e-12, "{}", f.name);
        }
    }
}

/// The 2×2×3 box with every outer face bond wired to the ghost.
fn brick() -> rfim_core::graph::Graph {
    let idx = |x: u32, y: u32, z: u32| (x * 2 + y) * 3 + z;
    let mut edges = Vec::new();
    let mut ghost = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..3 {
                if x == 0 {
                    edges.push([idx(x, y, z), idx(1, y, z)]);
                }
                if y == 0 {
                    edges.push([idx(x, y, z), idx(x, 1, z)]);
                }
                if z < 2 {
                    edges.push([idx(x, y, z), idx(x, y, z + 1)]);
                }
                let degree = if z == 1 { 4 } else { 3 };
                ghost.extend(std::iter::repeat_n(idx(x, y, z), 6 - degree));
            }
        }
    }
    rfim_core::graph::Graph::new(12, edges, ghost, idx(0, 0, 1) as usize).unwrap()
}

#[test]
fn brick_gibbs_law_matches_direct_enumeration() {
    let g = brick();
    assert_eq!(g.n_internal_edges(), 20);
    assert_eq!(g.ghost_edges().len(), 32);
    let h = gaussian_values(12, 9);
    for (bc, sign) in [(Plus, 1), (Minus, -1)] {
        let lib = gibbs_distribution(&g, bc, &h, 0.6, temp(2.5)).unwrap();
        assert!(common::tv(&lib, &common::ising_law(&g, sign, &h, 0.6, 2.5)) <= 1e-12);
    }
    let m = exact_boundary_influence(&g, &h, 0.6, temp(2.5)).unwrap();
    assert!(m > 0.0);
}

#[test]
fn fk_law_and_rao_blackwell_match_oracles() {
    let t = temp(2.2);
    for f in fixtures::standard() {
        let g = &f.graph;
        let h = gaussian_values(g.n_sites(), 6);
        let lib = fk_distribution(g, &h, 0.3, t).unwrap();
        assert!(
            common::tv(&lib, &common::fk_law(g, &h, 0.3, 2.2)) <= 1e-12,
            "{}",
            f.name
        );
        let rb = fk_expectation(g, &h, 0.3, t, |lab| rao_blackwell_minus_prob(lab, 0.3, t)).unwrap();
        let oracle = common::fk_origin_minus(g, &h, 0.3, 2.2);
        assert!((rb - oracle).abs() <= 1e-12, "{}: {rb} vs {oracle}", f.name);
        let spin = 1.0 - exact_spin_marginal(g, Plus, &h, 0.3, t, g.origin()).unwrap();
        assert!((spin - oracle).abs() <= 1e-10, "{}: {spin} vs {oracle}", f.name);
    }
}

#[test]
fn joint_table_conditionals() {
    let g = fixtures::ladder();
    let h = gaussian_values(g.n_sites(), 8);
    let t = temp(1.5);
    let j = joint_es_enumeration(&g, Plus, &h, 0.5, t).unwrap();
    // given σ, bonds are independent Bernoulli(p) on agreeing bonds
    let p = 1.0 - (-2.0f64 / 1.5).exp();
    let sigma = 0b101_101u64;
    let cond = j.bonds_given_spins(sigma);
    for (w, &pw) in cond.iter().enumerate() {
        let mut expected = 1.0;
        for b in 0..g.n_bonds() {
            let (u, v) = g.bond_endpoints(b);
            let spin = |x: usize| x == g.ghost() || sigma >> x & 1 == 1;
            let open = w >> b & 1 == 1;
            expected *= match (spin(u) == spin(v), open) {
                (true, true) => p,
                (true, false) => 1.0 - p,
                (false, true) => 0.0,
                (false, false) => 1.0,
            };
        }
        assert!((pw - expected).abs() <= 1e-12);
    }
    let sum: f64 = j.spins_given_bonds(0).iter().sum();
    assert!((sum - 1.0).abs() <= 1e-12);
}

#[test]
fn influence_is_nonnegative_on_fixtures() {
    for f in fixtures::standard() {
        let g = &f.graph;
        for seed in 0..4 {
            let h = gaussian_values(g.n_sites(), seed);
            for (eps, t) in [(0.0, 1.0), (0.5, 2.0), (2.0, 4.0), (0.1, 10.0)] {
                let m = exact_boundary_influence(g, &h, eps, temp(t)).unwrap();
                assert!(m >= -1e-12, "{} seed {seed}: m = {m}", f.name);
            }
        }
    }
}

#[test]
fn zero_eps_ignores_the_field() {
    let g = fixtures::cube_corner_wired();
    let h = gaussian_values(8, 11);
    let zero = vec![0.0; 8];
    for v in 0..8 {
        let a = exact_spin_marginal(&g, Plus, &h, 0.0, temp(2.0), v).unwrap();
        let b = exact_spin_marginal(&g, Plus, &zero, 0.7, temp(2.0), v).unwrap();
        assert!((a - b).abs() <= 1e-14);
    }
}

#[test]
fn cluster_count_identity_on_boxes() {
    for n in 0..=5 {
        let r = Region::new(n).unwrap();
        let lg = LatticeGraph::new(r, Wiring::Wired);
        let g = lg.graph();
        let h = vec![0.0; g.n_sites()];
        let closed = find_clusters(g, &BondConfig::closed(g), &h).n_clusters();
        let open = find_clusters(g, &BondConfig::open(g), &h).n_clusters();
        assert_eq!(closed - open, r.len(), "N = {n}");
    }
}

#[test]
fn sw_kernel_is_stochastic() {
    let g = fixtures::ladder();
    let h = gaussian_values(6, 2);
    let k = sw_kernel_exact(&g, &h, 0.4, temp(2.0)).unwrap();
    for row in &k {
        assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        assert!(row.iter().all(|&x| x >= 0.0));
    }
}

proptest! {
    #[test]
    fn hamiltonian_spin_flip_covariance(mask in 0u64..1 << 9, seed in any::<u64>(), eps in 0.0f64..3.0) {
        let g = fixtures::random_sparse(9, 2, 2, 1004);
        let h = gaussian_values(9, seed);
        let neg: Vec<f64> = h.iter().map(|x| -x).collect();
        let sigma = SpinConfig::from_mask(9, mask);
        let a = hamiltonian(&g, &sigma, Plus, &h, eps);
        let b = hamiltonian(&g, &sigma.flipped(), Minus, &neg, eps);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn influence_is_nonnegative(seed in any::<u64>(), eps in 0.0f64..2.0, t in 0.5f64..8.0) {
        let g = fixtures::random_sparse(7, 3, 2, seed);
        let h = gaussian_values(7, seed ^ 1);
        prop_assert!(exact_boundary_influence(&g, &h, eps, temp(t)).unwrap() >= -1e-12);
    }

    #[test]
    fn snapshot_round_trip(bits in prop::collection::vec(any::<bool>(), 0..200), seed in any::<u64>(), sweeps in any::<u64>()) {
        let snap = BondSnapshot { half_side: 3, temperature: 2.5, eps: 0.1, seed, sweeps, bonds: BondConfig::from_bits(bits) };
        let mut buf = Vec::new();
        snap.write_to(&mut buf).unwrap();
        prop_assert_eq!(BondSnapshot::read_from(&buf[..]).unwrap(), snap);
    }
}
