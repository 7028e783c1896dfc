//! The field-flipping map `τ`, reference clusters and cluster weight ratios.
//!
//! Fine site sets here live on `Λ_{N+1}`: sites outside `Λ_N` are the
//! exterior, all identified with the ghost vertex (wired boundary).

use serde::Serialize;

use crate::coarsegrain::Decomposition;
use crate::disorder::DisorderField;
use crate::exactgibbs::{GibbsError, Temperature};
use crate::fkising::exact::fk_log_partition;
use crate::fkising::{find_clusters, BondConfig};
use crate::graph::{Graph, LatticeGraph, Wiring};
use crate::lattice::{CoarseGrid, Region, SiteSet, DIRECTIONS};
use crate::math::log_cosh;
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PeierlsError {
    #[error("hole {hole}: {found} components of diameter >= q in the annulus, expected exactly one")]
    HoleReference { hole: usize, found: usize },
    #[error("outer region: {found} components of diameter >= q in the annulus, expected exactly one")]
    OuterReference { found: usize },
    #[error("fine holes {0} and {1} overlap with opposite flip signs")]
    ConflictingOverlap(usize, usize),
    #[error("lattice, grid and field disagree on the region")]
    RegionMismatch,
}

/// `sign` with `sign(0) = +1`.
pub fn sign(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// Open clusters of `ω` restricted to a fine site set on `Λ_{N+1}`.
/// Exterior sites in the set are merged into one ghost component.
pub struct RestrictedComponents {
    ext: Region,
    labels: Vec<u32>,
    count: usize,
    lo: Vec<[i32; 3]>,
    hi: Vec<[i32; 3]>,
    ghost: Option<u32>,
}

pub const OUTSIDE: u32 = u32::MAX;

impl RestrictedComponents {
    pub fn new(lattice: &LatticeGraph, bonds: &BondConfig, mask: &SiteSet) -> Self {
        let region = lattice.region();
        let ext = mask.region();
        assert_eq!(ext.half_side(), region.half_side() + 1, "mask must live on Λ_(N+1)");
        let mut uf = UnionFind::new(ext.len());
        let mut first_exterior: Option<usize> = None;
        for i in mask.indices() {
            let s = ext.site(i);
            let s_in = region.contains(s);
            if !s_in {
                match first_exterior {
                    Some(e) => {
                        uf.union(e, i);
                    }
                    None => first_exterior = Some(i),
                }
            }
            for dir in [0usize, 2, 4] {
                let t = s + DIRECTIONS[dir];
                let Some(j) = ext.index(t) else { continue };
                if !mask.contains_index(j) {
                    continue;
                }
                let open = match (s_in, region.contains(t)) {
                    (true, _) => lattice.bond(s, dir).is_some_and(|b| bonds.is_open(b)),
                    (false, true) => lattice.bond(t, dir + 1).is_some_and(|b| bonds.is_open(b)),
                    (false, false) => lattice.wiring() == Wiring::Wired,
                };
                if open {
                    uf.union(i, j);
                }
            }
        }
        let mut labels = vec![OUTSIDE; ext.len()];
        let mut root_label = vec![OUTSIDE; ext.len()];
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for i in mask.indices() {
            let r = uf.find(i);
            if root_label[r] == OUTSIDE {
                root_label[r] = lo.len() as u32;
                lo.push([i32::MAX; 3]);
                hi.push([i32::MIN; 3]);
            }
            let l = root_label[r];
            labels[i] = l;
            let c = ext.site(i).coords();
            for a in 0..3 {
                lo[l as usize][a] = lo[l as usize][a].min(c[a]);
                hi[l as usize][a] = hi[l as usize][a].max(c[a]);
            }
        }
        let ghost = first_exterior.map(|e| labels[e]);
        RestrictedComponents {
            ext,
            count: lo.len(),
            labels,
            lo,
            hi,
            ghost,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn label(&self, ext_index: usize) -> u32 {
        self.labels[ext_index]
    }

    pub fn ghost(&self) -> Option<u32> {
        self.ghost
    }

    /// `ℓ∞` diameter of component `c` (exterior sites included).
    pub fn diameter(&self, c: u32) -> i32 {
        let (lo, hi) = (self.lo[c as usize], self.hi[c as usize]);
        (0..3).map(|a| hi[a] - lo[a]).max().unwrap()
    }

    /// Sites of component `c` inside `Λ_N`, as a set on `lattice_region`.
    pub fn members(&self, c: u32, lattice_region: Region) -> SiteSet {
        let mut out = SiteSet::empty(lattice_region);
        for (i, &l) in self.labels.iter().enumerate() {
            if l == c {
                let s = self.ext.site(i);
                if let Some(j) = lattice_region.index(s) {
                    out.insert_index(j);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceCluster {
    /// Sites inside `Λ_N`.
    pub sites: SiteSet,
    pub touches_exterior: bool,
    /// Unscaled `h_C`.
    pub field_sum: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceClusters {
    /// `C_1..C_n`.
    pub holes: Vec<ReferenceCluster>,
    /// `C_⋄^E`, absent when `U_*` is empty.
    pub outer: Option<ReferenceCluster>,
    /// `C_⋄^E ↔ ∂_e Λ_N` inside the edge set `E`.
    pub outer_wired: bool,
    /// `ξ_j = sign(h_{C_j})`.
    pub hole_signs: Vec<i8>,
    /// `ξ_⋄ = sign(h_{C_⋄^E})`, `+1` when `U_*` is empty.
    pub outer_sign: i8,
}

fn reference_in(
    lattice: &LatticeGraph,
    bonds: &BondConfig,
    region_mask: &SiteSet,
    annulus_mask: &SiteSet,
    q: i32,
    h: &DisorderField,
) -> Result<ReferenceCluster, usize> {
    let annulus = RestrictedComponents::new(lattice, bonds, annulus_mask);
    let large: Vec<u32> = (0..annulus.count() as u32)
        .filter(|&c| annulus.diameter(c) >= q)
        .collect();
    if large.len() != 1 {
        return Err(large.len());
    }
    let witness = annulus
        .labels
        .iter()
        .position(|&l| l == large[0])
        .expect("nonempty component");
    let full = RestrictedComponents::new(lattice, bonds, region_mask);
    let c = full.label(witness);
    let sites = full.members(c, lattice.region());
    let field_sum = h.field_sum(&sites).expect("same region");
    Ok(ReferenceCluster {
        sites,
        touches_exterior: full.ghost() == Some(c),
        field_sum,
    })
}

/// Fine sets of the decomposition on `Λ_{N+1}`.
pub struct FineSets {
    pub holes: Vec<SiteSet>,
    pub hole_annuli: Vec<SiteSet>,
    pub outer: SiteSet,
    pub outer_annulus: SiteSet,
    /// `Q_{U_* ∪ U_1 ∪ … ∪ U_n}`: the vertex set of `E`.
    pub edge_set: SiteSet,
}

impl FineSets {
    pub fn new(grid: &CoarseGrid, d: &Decomposition) -> Self {
        FineSets {
            holes: d.holes.iter().map(|u| grid.fine_set(u)).collect(),
            hole_annuli: d.hole_annuli.iter().map(|u| grid.fine_set(u)).collect(),
            outer: grid.fine_set(&d.outer),
            outer_annulus: grid.fine_set(&d.outer_annulus),
            edge_set: grid.fine_set(&d.outside_ball_k()),
        }
    }
}

/// Finds `C_j` in every hole and `C_⋄^E` in `U_*`, and whether `C_⋄^E`
/// reaches the exterior using only edges inside `E`.
pub fn detect_reference_clusters(
    lattice: &LatticeGraph,
    grid: &CoarseGrid,
    bonds: &BondConfig,
    d: &Decomposition,
    h: &DisorderField,
) -> Result<ReferenceClusters, PeierlsError> {
    if lattice.region() != grid.fine() || h.region() != grid.fine() {
        return Err(PeierlsError::RegionMismatch);
    }
    let fine = FineSets::new(grid, d);
    let q = grid.q();
    let mut holes = Vec::with_capacity(fine.holes.len());
    for (j, (u, a)) in fine.holes.iter().zip(&fine.hole_annuli).enumerate() {
        let c =
            reference_in(lattice, bonds, u, a, q, h).map_err(|found| PeierlsError::HoleReference { hole: j, found })?;
        holes.push(c);
    }
    let hole_signs = holes.iter().map(|c| sign(c.field_sum)).collect();
    if d.outer.is_empty() {
        return Ok(ReferenceClusters {
            holes,
            outer: None,
            outer_wired: true,
            hole_signs,
            outer_sign: 1,
        });
    }
    let outer = reference_in(lattice, bonds, &fine.outer, &fine.outer_annulus, q, h)
        .map_err(|found| PeierlsError::OuterReference { found })?;
    let e = RestrictedComponents::new(lattice, bonds, &fine.edge_set);
    let outer_wired = outer.touches_exterior
        || match (outer.sites.iter().next(), e.ghost()) {
            (Some(s), Some(g)) => e.label(grid.extended().index_unchecked(s)) == g,
            _ => false,
        };
    let outer_sign = sign(outer.field_sum);
    Ok(ReferenceClusters {
        holes,
        outer: Some(outer),
        outer_wired,
        hole_signs,
        outer_sign,
    })
}

/// `τ(h)` with a record of which holes were negated.
#[derive(Clone, Debug, PartialEq)]
pub struct FlippedField {
    pub field: DisorderField,
    pub negated: Vec<bool>,
    pub connected: bool,
}

/// `τ(h)_x = ξ_j h_x` on `U_j` when `C_⋄^E` is wired, `ξ_⋄ ξ_j h_x`
/// otherwise, and `h_x` off the holes.
pub fn flip_field(
    grid: &CoarseGrid,
    h: &DisorderField,
    refs: &ReferenceClusters,
    d: &Decomposition,
) -> Result<FlippedField, PeierlsError> {
    let region = h.region();
    let factors: Vec<i8> = refs
        .hole_signs
        .iter()
        .map(|&xi| if refs.outer_wired { xi } else { refs.outer_sign * xi })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; region.len()];
    let mut values = h.values().to_vec();
    for (j, u) in d.holes.iter().enumerate() {
        for s in grid.fine_set(u).iter() {
            let Some(i) = region.index(s) else { continue };
            if let Some(prev) = owner[i] {
                if factors[prev] != factors[j] {
                    return Err(PeierlsError::ConflictingOverlap(prev, j));
                }
                continue;
            }
            owner[i] = Some(j);
            values[i] = factors[j] as f64 * h.values()[i];
        }
    }
    let field = DisorderField::from_values(region, h.seed(), values).expect("finite values");
    Ok(FlippedField {
        field,
        negated: factors.iter().map(|&f| f < 0).collect(),
        connected: refs.outer_wired,
    })
}

/// `ln Ratio(ω, h) = ε (τh)_{C*}/T + Σ_{C ≠ C*} ln cosh(ε (τh)_C / T)` over
/// the clusters of `ω` on the whole graph; `tau_h` is the already flipped
/// field.
pub fn ratio_fine(graph: &Graph, bonds: &BondConfig, tau_h: &[f64], eps: f64, t: Temperature) -> f64 {
    let labeling = find_clusters(graph, bonds, tau_h);
    let beta = 1.0 / t.value();
    (0..labeling.n_clusters())
        .map(|c| {
            let x = eps * labeling.field_sum(c) * beta;
            if c == labeling.ghost_cluster() {
                x
            } else {
                log_cosh(x)
            }
        })
        .sum()
}

/// The same sum over clusters of `ω` restricted to the edge set `E`, the
/// ghost cluster taking the linear term.
pub fn ratio_coarse(
    lattice: &LatticeGraph,
    grid: &CoarseGrid,
    bonds: &BondConfig,
    tau_h: &DisorderField,
    eps: f64,
    t: Temperature,
    d: &Decomposition,
) -> f64 {
    let edge_set = grid.fine_set(&d.outside_ball_k());
    let comps = RestrictedComponents::new(lattice, bonds, &edge_set);
    let region = lattice.region();
    let ext = grid.extended();
    let mut sums = vec![0.0; comps.count()];
    for s in edge_set.iter() {
        if let Some(i) = region.index(s) {
            sums[comps.label(ext.index_unchecked(s)) as usize] += tau_h.values()[i];
        }
    }
    let beta = 1.0 / t.value();
    sums.iter()
        .enumerate()
        .map(|(c, &sum)| {
            let x = eps * sum * beta;
            if Some(c as u32) == comps.ghost() {
                x
            } else {
                log_cosh(x)
            }
        })
        .sum()
}

/// `ln Z_φ⁺(εh') − ln Z_φ⁺(εh)` by full bond enumeration.
pub fn exact_partition_ratio(
    graph: &Graph,
    h: &[f64],
    h_prime: &[f64],
    eps: f64,
    t: Temperature,
) -> Result<f64, GibbsError> {
    Ok(fk_log_partition(graph, h_prime, eps, t)? - fk_log_partition(graph, h, eps, t)?)
}

/// Summary of one Peierls instance for reports.
#[derive(Clone, Debug, Serialize)]
pub struct FlipReport {
    pub holes: usize,
    pub connected: bool,
    pub negated: usize,
    pub ratio_fine: f64,
    pub ratio_coarse: f64,
    pub shell_abs_sum: f64,
    /// `ln w_h(ω) − ln w_{τh}(ω)`.
    pub weight_gap: f64,
}
