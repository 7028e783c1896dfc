use serde::Serialize;

use crate::exactgibbs::{SpinConfig, Temperature};
use crate::fkising::{BondConfig, SwChain};
use crate::graph::{LatticeGraph, Wiring};
use crate::lattice::{CoarseGrid, Region, Site, DIRECTIONS};
use crate::rng::chain_rng;
use crate::stats::batch_means;
use crate::unionfind::UnionFind;

/// Good-box test with reusable buffers.
///
/// `Q = center + [−q, q]^3` is good when some cluster of `ω|_Q` has a vertex
/// on each of the six faces and every cluster of `ℓ∞` diameter at least `q`
/// is that cluster. Sites of `Q` outside the lattice belong to the exterior:
/// under wired boundary they are mutually joined (they are the ghost vertex);
/// edges between a lattice site and the exterior carry the ghost bond.
pub struct GoodBoxTester {
    q: i32,
    uf: UnionFind,
    lo: Vec<[i32; 3]>,
    hi: Vec<[i32; 3]>,
}

impl GoodBoxTester {
    pub fn new(q: i32) -> Self {
        assert!(q >= 1);
        let len = ((2 * q + 1) as usize).pow(3);
        GoodBoxTester {
            q,
            uf: UnionFind::new(len),
            lo: vec![[0; 3]; len],
            hi: vec![[0; 3]; len],
        }
    }

    pub fn is_good(&mut self, lattice: &LatticeGraph, bonds: &BondConfig, center: Site) -> bool {
        let q = self.q;
        let side = 2 * q + 1;
        let len = (side as usize).pow(3);
        let region = lattice.region();
        let local = |x: i32, y: i32, z: i32| ((x * side + y) * side + z) as usize;
        self.uf.reset(len);
        for x in 0..side {
            for y in 0..side {
                for z in 0..side {
                    let s = center + Site::new(x - q, y - q, z - q);
                    let here = local(x, y, z);
                    let s_in = region.contains(s);
                    for (axis, dir) in [(0usize, 0usize), (1, 2), (2, 4)] {
                        let mut c = [x, y, z];
                        c[axis] += 1;
                        if c[axis] >= side {
                            continue;
                        }
                        let t = s + DIRECTIONS[dir];
                        let open = match (s_in, region.contains(t)) {
                            (true, _) => lattice.bond(s, dir).is_some_and(|b| bonds.is_open(b)),
                            (false, true) => lattice.bond(t, dir + 1).is_some_and(|b| bonds.is_open(b)),
                            (false, false) => lattice.wiring() == Wiring::Wired,
                        };
                        if open {
                            self.uf.union(here, local(c[0], c[1], c[2]));
                        }
                    }
                }
            }
        }
        for r in 0..len {
            self.lo[r] = [side; 3];
            self.hi[r] = [-1; 3];
        }
        for x in 0..side {
            for y in 0..side {
                for z in 0..side {
                    let r = self.uf.find(local(x, y, z));
                    for (a, v) in [x, y, z].into_iter().enumerate() {
                        self.lo[r][a] = self.lo[r][a].min(v);
                        self.hi[r][a] = self.hi[r][a].max(v);
                    }
                }
            }
        }
        let mut spanning = 0;
        let mut large = 0;
        for r in 0..len {
            if self.hi[r][0] < 0 {
                continue;
            }
            let (lo, hi) = (self.lo[r], self.hi[r]);
            let diam = (0..3).map(|a| hi[a] - lo[a]).max().unwrap();
            if diam >= q {
                large += 1;
            }
            if (0..3).all(|a| lo[a] == 0 && hi[a] == side - 1) {
                spanning += 1;
            }
        }
        spanning == 1 && large == 1
    }
}

/// Good-box test for the block `Q_v` of the coarse grid.
pub fn is_good_box(lattice: &LatticeGraph, grid: &CoarseGrid, bonds: &BondConfig, v: Site) -> bool {
    GoodBoxTester::new(grid.q()).is_good(lattice, bonds, grid.center(v))
}

/// Good-box test for `center + [−q, q]^3`.
pub fn is_good_box_at(lattice: &LatticeGraph, bonds: &BondConfig, center: Site, q: i32) -> bool {
    GoodBoxTester::new(q).is_good(lattice, bonds, center)
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodBoxEstimate {
    pub q: i32,
    pub wiring: Wiring,
    pub samples: usize,
    pub prob: f64,
    pub stderr: f64,
}

/// Fraction of Swendsen–Wang samples (ε = 0) on `Λ_{2q}` in which
/// `Λ_q` is good, one sweep apart after `burn_in` sweeps; the error is from
/// batch means.
pub fn estimate_goodbox_probability(
    t: Temperature,
    q: i32,
    wiring: Wiring,
    samples: usize,
    burn_in: usize,
    seed: u64,
) -> GoodBoxEstimate {
    let lattice = LatticeGraph::new(Region::new(2 * q as i64).expect("small region"), wiring);
    let g = lattice.graph();
    let mut chain = SwChain::new(
        g,
        vec![0.0; g.n_sites()],
        0.0,
        t,
        SpinConfig::uniform(g.n_sites(), 1),
        chain_rng(seed, q as u64),
    );
    for _ in 0..burn_in {
        chain.step();
    }
    let mut tester = GoodBoxTester::new(q);
    let series: Vec<f64> = (0..samples)
        .map(|_| {
            chain.step();
            tester.is_good(&lattice, chain.bonds(), Site::ORIGIN) as u8 as f64
        })
        .collect();
    let est = batch_means(&series, 50.min(samples.max(1)));
    GoodBoxEstimate {
        q,
        wiring,
        samples,
        prob: est.mean,
        stderr: est.stderr,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CgCalibration {
    pub q: i32,
    pub p_bad: f64,
    /// `−ln(P̂_bad)/q`, or `ln(samples)/q` as a lower bound when no bad box
    /// was seen.
    pub c_g: f64,
    pub lower_bound: bool,
}

/// Per-`q` estimates of `c_g` from `P(bad) ≈ e^{−c_g q}`.
pub fn calibrate_cg(estimates: &[GoodBoxEstimate]) -> Vec<CgCalibration> {
    estimates
        .iter()
        .map(|e| {
            let p_bad = 1.0 - e.prob;
            if p_bad > 0.0 {
                CgCalibration {
                    q: e.q,
                    p_bad,
                    c_g: -p_bad.ln() / e.q as f64,
                    lower_bound: false,
                }
            } else {
                CgCalibration {
                    q: e.q,
                    p_bad,
                    c_g: (e.samples.max(1) as f64).ln() / e.q as f64,
                    lower_bound: true,
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bond_between(lattice: &LatticeGraph, s: Site, dir: usize) -> usize {
        lattice.bond(s, dir).unwrap()
    }

    #[test]
    fn extremes() {
        let lattice = LatticeGraph::new(Region::new(4).unwrap(), Wiring::Wired);
        let g = lattice.graph();
        assert!(is_good_box_at(&lattice, &BondConfig::open(g), Site::ORIGIN, 2));
        assert!(!is_good_box_at(&lattice, &BondConfig::closed(g), Site::ORIGIN, 2));
    }

    #[test]
    fn second_long_path_makes_box_bad() {
        let q = 3;
        let lattice = LatticeGraph::new(Region::new(6).unwrap(), Wiring::Wired);
        let g = lattice.graph();
        let mut bonds = BondConfig::open(g);
        assert!(is_good_box_at(&lattice, &bonds, Site::ORIGIN, q));
        // detach the box edge line {y = z = -3} from the rest of the box
        for x in -3..=3 {
            for dir in [2, 4] {
                bonds.set(bond_between(&lattice, Site::new(x, -3, -3), dir), false);
            }
        }
        assert!(!is_good_box_at(&lattice, &bonds, Site::ORIGIN, q));
        // cutting it into pieces of diameter < q restores goodness
        for x in [-1, 1] {
            bonds.set(bond_between(&lattice, Site::new(x, -3, -3), 0), false);
        }
        assert!(is_good_box_at(&lattice, &bonds, Site::ORIGIN, q));
    }

    #[test]
    fn boundary_block_uses_exterior_as_ghost() {
        let grid = CoarseGrid::with_coarse_half_side(1, 2).unwrap();
        let lattice = LatticeGraph::new(grid.fine(), Wiring::Wired);
        let bonds = BondConfig::open(lattice.graph());
        assert!(is_good_box(&lattice, &grid, &bonds, Site::new(1, 1, 1)));
    }

    #[test]
    fn calibration_handles_zero_bad_counts() {
        let e = |prob| GoodBoxEstimate {
            q: 4,
            wiring: Wiring::Wired,
            samples: 1000,
            prob,
            stderr: 0.0,
        };
        let cal = calibrate_cg(&[e(0.9), e(1.0)]);
        assert!((cal[0].c_g - (-(0.1f64).ln() / 4.0)).abs() < 1e-12);
        assert!(!cal[0].lower_bound);
        assert!(cal[1].lower_bound);
    }
}
