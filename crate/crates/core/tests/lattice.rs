mod common;

use proptest::prelude::*;
use rfim_core::lattice::{CoarseGrid, Region, Site, SiteSet};

#[test]
fn edge_handshake() {
    for n in 0..=16 {
        let r = Region::new(n).unwrap();
        let internal = r.internal_edges().len();
        let boundary = r.boundary_edges().len();
        let side = (2 * n + 1) as usize;
        assert_eq!(2 * internal + boundary, 6 * side.pow(3), "N = {n}");
        assert_eq!(boundary, 6 * side * side);
    }
}

#[test]
fn region_indexing_round_trips() {
    let r = Region::new(3).unwrap();
    for (i, s) in r.sites().enumerate() {
        assert_eq!(r.index(s), Some(i));
        assert_eq!(r.site(i), s);
    }
    assert_eq!(r.index(Site::new(4, 0, 0)), None);
    assert_eq!(r.site(r.origin_index()), Site::ORIGIN);
}

#[test]
fn coarse_blocks_cover_the_extended_region() {
    let grid = CoarseGrid::with_coarse_half_side(2, 3).unwrap();
    let cover = grid.fine_set(&SiteSet::full(grid.coarse()));
    assert_eq!(cover, SiteSet::full(grid.extended()));
    let centre = SiteSet::from_sites(grid.coarse(), [Site::ORIGIN]).unwrap();
    assert_eq!(grid.fine_set(&centre).len(), 7usize.pow(3));
    assert!(CoarseGrid::new(Region::new(8).unwrap(), 4).is_err());
}

fn random_set(region: Region, bits: &[bool]) -> SiteSet {
    SiteSet::from_mask(region, bits.iter().copied().take(region.len()).collect())
}

proptest! {
    #[test]
    fn enclosure_matches_definition(n in 1i64..=4, bits in prop::collection::vec(prop::bool::weighted(0.3), 729)) {
        let r = Region::new(n).unwrap();
        let a = random_set(r, &bits);
        prop_assert_eq!(a.enclosure(), common::enclosure_brute(&a));
    }

    #[test]
    fn enclosure_is_monotone_and_idempotent(
        a_bits in prop::collection::vec(prop::bool::weighted(0.25), 17usize.pow(3)),
        b_bits in prop::collection::vec(prop::bool::weighted(0.1), 17usize.pow(3)),
    ) {
        let r = Region::new(8).unwrap();
        let a = random_set(r, &a_bits);
        let b = a.union(&random_set(r, &b_bits));
        let pa = a.enclosure();
        prop_assert!(a.is_subset(&pa));
        prop_assert!(pa.is_subset(&b.enclosure()));
        prop_assert_eq!(pa.enclosure(), pa.clone());
    }

    #[test]
    fn boundaries_are_consistent(bits in prop::collection::vec(prop::bool::weighted(0.5), 343)) {
        let r = Region::new(3).unwrap();
        let a = random_set(r, &bits);
        prop_assert_eq!(a.internal_boundary(), common::inner_boundary(&a));
        let ext = a.external_boundary();
        prop_assert!(ext.is_disjoint(&a));
        for s in ext.iter() {
            prop_assert!(s.neighbors().iter().any(|&w| a.contains(w)));
        }
    }

    #[test]
    fn components_partition_the_set(bits in prop::collection::vec(prop::bool::weighted(0.4), 343), k in 1i32..3) {
        let r = Region::new(3).unwrap();
        let a = random_set(r, &bits);
        for comps in [a.nn_components(), a.k_components(k)] {
            let mut union = SiteSet::empty(r);
            for c in &comps {
                prop_assert!(union.is_disjoint(c));
                union = union.union(c);
            }
            prop_assert_eq!(&union, &a);
        }
        for c in a.nn_components() {
            prop_assert!(common::is_connected(&c));
        }
    }

    #[test]
    fn ball_is_linf_neighbourhood(bits in prop::collection::vec(prop::bool::weighted(0.05), 343), k in 0i32..3) {
        let r = Region::new(3).unwrap();
        let a = random_set(r, &bits);
        let ball = a.ball(k);
        for s in r.sites() {
            let near = a.iter().any(|t| t.linf(s) <= k);
            prop_assert_eq!(ball.contains(s), near);
        }
    }
}
