mod common;

use proptest::prelude::*;
use rand::Rng;
use rfim_core::coarsegrain::{decompose, BlueBoundary, Decomposition};
use rfim_core::disorder::{gaussian_values, DisorderField};
use rfim_core::exactgibbs::Temperature;
use rfim_core::fkising::{fk_log_weight, BondConfig};
use rfim_core::graph::{fixtures, LatticeGraph, Wiring};
use rfim_core::lattice::{CoarseGrid, Site, SiteSet, DIRECTIONS};
use rfim_core::peierls::{detect_reference_clusters, flip_field, ratio_fine, sign, FineSets};
use rfim_core::rng::chain_rng;

fn shell_instance() -> (CoarseGrid, Decomposition) {
    let grid = CoarseGrid::with_coarse_half_side(6, 2).unwrap();
    let r = grid.coarse();
    let shell = SiteSet::from_sites(r, [Site::ORIGIN])
        .unwrap()
        .ball(3)
        .internal_boundary();
    let d = decompose(
        &BlueBoundary {
            b: shell,
            b_prime: SiteSet::empty(r),
        },
        1,
    )
    .unwrap();
    (grid, d)
}

fn random_bonds(n: usize, p: f64, seed: u64) -> BondConfig {
    let mut rng = chain_rng(seed, 0);
    BondConfig::from_bits((0..n).map(|_| rng.random_bool(p)).collect())
}

/// Bonds with both ends in the vertex set of `E` (exterior ends included).
fn edge_set_bonds(lattice: &LatticeGraph, grid: &CoarseGrid, d: &Decomposition) -> Vec<bool> {
    let e = FineSets::new(grid, d).edge_set;
    let mut inside = vec![false; lattice.graph().n_bonds()];
    for s in lattice.region().sites() {
        for (dir, &step) in DIRECTIONS.iter().enumerate() {
            if let Some(b) = lattice.bond(s, dir) {
                if e.contains(s) && e.contains(s + step) {
                    inside[b] = true;
                }
            }
        }
    }
    inside
}

#[test]
fn flip_invariants_on_lattice_instances() {
    let (grid, d) = shell_instance();
    let mut valid = [0usize; 2];
    for (case, wiring) in [Wiring::Wired, Wiring::Free].into_iter().enumerate() {
        let lattice = LatticeGraph::new(grid.fine(), wiring);
        for seed in 0..12u64 {
            let bonds = random_bonds(lattice.graph().n_bonds(), 0.9, seed);
            let h = DisorderField::sample(grid.fine(), 500 + seed);
            let Ok(refs) = detect_reference_clusters(&lattice, &grid, &bonds, &d, &h) else {
                continue;
            };
            let Ok(tau) = flip_field(&grid, &h, &refs, &d) else {
                continue;
            };
            valid[case] += 1;
            for (a, b) in tau.field.values().iter().zip(h.values()) {
                assert_eq!(a.abs(), b.abs());
            }
            let sums: Vec<f64> = refs
                .holes
                .iter()
                .map(|c| tau.field.field_sum(&c.sites).unwrap())
                .collect();
            if refs.outer_wired {
                assert!(sums.iter().all(|&x| x >= 0.0), "{sums:?}");
                let again = detect_reference_clusters(&lattice, &grid, &bonds, &d, &tau.field).unwrap();
                let twice = flip_field(&grid, &tau.field, &again, &d).unwrap();
                assert_eq!(twice.field, tau.field);
            } else {
                assert!(
                    sums.iter().all(|&x| sign(x) == refs.outer_sign),
                    "{sums:?} vs {}",
                    refs.outer_sign
                );
            }
            assert_eq!(
                wiring == Wiring::Wired,
                refs.outer_wired || refs.outer.as_ref().is_some_and(|c| c.touches_exterior)
            );
        }
    }
    assert!(valid[0] > 0 && valid[1] > 0, "valid instances {valid:?}");
}

#[test]
fn flip_depends_only_on_edges_in_e() {
    let (grid, d) = shell_instance();
    let lattice = LatticeGraph::new(grid.fine(), Wiring::Wired);
    let inside = edge_set_bonds(&lattice, &grid, &d);
    let mut rng = chain_rng(77, 0);
    let mut compared = 0;
    for seed in 0..8u64 {
        let bonds = random_bonds(inside.len(), 0.9, 900 + seed);
        let h = DisorderField::sample(grid.fine(), seed);
        let Ok(refs) = detect_reference_clusters(&lattice, &grid, &bonds, &d, &h) else {
            continue;
        };
        let tau = flip_field(&grid, &h, &refs, &d).unwrap();
        let mut mutated = bonds.clone();
        for (b, &keep) in inside.iter().enumerate() {
            if !keep {
                mutated.set(b, rng.random_bool(0.5));
            }
        }
        let refs2 = detect_reference_clusters(&lattice, &grid, &mutated, &d, &h).unwrap();
        assert_eq!(refs2.outer_wired, refs.outer_wired);
        assert_eq!(refs2.hole_signs, refs.hole_signs);
        assert_eq!(flip_field(&grid, &h, &refs2, &d).unwrap(), tau);
        compared += 1;
    }
    assert!(compared > 0);
}

#[test]
fn weight_gap_is_bounded_by_flipped_field() {
    let (grid, d) = shell_instance();
    let lattice = LatticeGraph::new(grid.fine(), Wiring::Wired);
    let g = lattice.graph();
    let t = Temperature::new(3.0).unwrap();
    let eps = 0.1;
    for seed in 0..6u64 {
        let bonds = random_bonds(g.n_bonds(), 0.9, 300 + seed);
        let h = DisorderField::sample(grid.fine(), 40 + seed);
        let Ok(refs) = detect_reference_clusters(&lattice, &grid, &bonds, &d, &h) else {
            continue;
        };
        let tau = flip_field(&grid, &h, &refs, &d).unwrap();
        let gap = fk_log_weight(g, &bonds, h.values(), eps, t) - fk_log_weight(g, &bonds, tau.field.values(), eps, t);
        let flipped: f64 = h
            .values()
            .iter()
            .zip(tau.field.values())
            .filter(|(a, b)| a != b)
            .map(|(a, _)| a.abs())
            .sum();
        assert!(
            gap.abs() <= 2.0 * eps / t.value() * flipped + 1e-9,
            "gap {gap} vs {flipped}"
        );
        let shell_sum = h.shell_abs_sum(&grid, &d).unwrap();
        assert!(shell_sum > 0.0);
        let c_hat = gap / (eps * shell_sum);
        assert!(c_hat.is_finite());
    }
}

proptest! {
    #[test]
    fn ratio_identity_on_fixtures(which in 0usize..9, mask in any::<u64>(), seed in any::<u64>(), eps in 0.0f64..2.0, t in 0.5f64..6.0) {
        let f = &fixtures::standard()[which];
        let g = &f.graph;
        let omega = mask & ((1u64 << g.n_bonds()) - 1);
        let tau_h = gaussian_values(g.n_sites(), seed);
        let zero = vec![0.0; g.n_sites()];
        let bonds = BondConfig::from_mask(g.n_bonds(), omega);
        let lhs = ratio_fine(g, &bonds, &tau_h, eps, Temperature::new(t).unwrap()) + common::fk_log_weight_oracle(g, omega, &zero, eps, t);
        let rhs = common::fk_log_weight_oracle(g, omega, &tau_h, eps, t);
        prop_assert!((lhs - rhs).exp_m1().abs() <= 1e-10, "{} {} vs {}", f.name, lhs, rhs);
    }
}
