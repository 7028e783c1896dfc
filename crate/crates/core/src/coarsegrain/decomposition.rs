use serde::Serialize;

use super::{BlueBoundary, CoarseColoring};
use crate::lattice::SiteSet;

#[derive(Debug, Clone, thiserror::Error)]
pub enum DecompositionError {
    #[error("decomposition needs a nonempty boundary B")]
    EmptyBoundary,
    #[error("k must be positive, got {0}")]
    BadK(i32),
    #[error("invariant failures: {}", .0.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", "))]
    Invariant(Vec<InvariantCheck>),
}

/// One checked property of a decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    /// False when the property is only claimed for a parameter range that
    /// excludes this instance (it is then reported but never fatal).
    pub applicable: bool,
    pub detail: String,
}

/// `Ball(X, 2k)` split into `X = B ∪ B'`, `S1`, `S2`, and the complement of
/// `Ball(X, k)` split into holes `U_1..U_n` and the outer part `U_*`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub k: i32,
    pub b: SiteSet,
    pub b_prime: SiteSet,
    pub s1: SiteSet,
    pub s2: SiteSet,
    pub holes: Vec<SiteSet>,
    pub outer: SiteSet,
    /// `∂_k U_j = {u ∈ U_j : d_∞(u, ∂_e U_j) ≤ k}`.
    pub hole_annuli: Vec<SiteSet>,
    /// The same annulus for `U_*`, with `∂_e` taken inside the grid.
    pub outer_annulus: SiteSet,
}

fn annulus(u: &SiteSet, k: i32) -> SiteSet {
    u.external_boundary().ball(k).intersection(u)
}

/// Builds the decomposition of `B ∪ B'` and checks its geometric
/// invariants. Failures of properties claimed for every `k` are errors;
/// the volume bound `|S2| ≤ 80k³|B∪B'|` holds for `k ≥ 4` only and is just
/// reported below that.
pub fn decompose(boundary: &BlueBoundary, k: i32) -> Result<Decomposition, DecompositionError> {
    if boundary.b.is_empty() {
        return Err(DecompositionError::EmptyBoundary);
    }
    if k < 1 {
        return Err(DecompositionError::BadK(k));
    }
    let x = boundary.union();
    let ball_k = x.ball(k);
    let ball_2k = x.ball(2 * k);
    let s1 = ball_k.difference(&x);
    let s2 = ball_2k.difference(&ball_k);
    let region = x.region();
    let mut holes = Vec::new();
    let mut outer = SiteSet::empty(region);
    for c in ball_k.complement().nn_components() {
        if c.touches_region_boundary() {
            outer = outer.union(&c);
        } else {
            holes.push(c);
        }
    }
    let hole_annuli = holes.iter().map(|u| annulus(u, k)).collect();
    let outer_annulus = annulus(&outer, k);
    let d = Decomposition {
        k,
        b: boundary.b.clone(),
        b_prime: boundary.b_prime.clone(),
        s1,
        s2,
        holes,
        outer,
        hole_annuli,
        outer_annulus,
    };
    let failures: Vec<InvariantCheck> = d
        .geometric_checks()
        .into_iter()
        .filter(|c| c.applicable && !c.passed)
        .collect();
    if failures.is_empty() {
        Ok(d)
    } else {
        Err(DecompositionError::Invariant(failures))
    }
}

fn check(name: &str, passed: bool, applicable: bool, detail: String) -> InvariantCheck {
    InvariantCheck {
        name: name.to_string(),
        passed,
        applicable,
        detail,
    }
}

impl Decomposition {
    /// `X = B ∪ B'`.
    pub fn x(&self) -> SiteSet {
        self.b.union(&self.b_prime)
    }

    /// `Ball(B ∪ B', 4k)`, whose fine version carries `H_{B,B'}`.
    pub fn shell(&self) -> SiteSet {
        self.x().ball(4 * self.k)
    }

    pub fn n_holes(&self) -> usize {
        self.holes.len()
    }

    /// `U_* ∪ U_1 ∪ … ∪ U_n`.
    pub fn outside_ball_k(&self) -> SiteSet {
        self.holes.iter().fold(self.outer.clone(), |acc, h| acc.union(h))
    }

    /// `ψ(Ball(B ∪ B', k))`.
    pub fn enclosed(&self) -> SiteSet {
        self.outer.complement()
    }

    pub fn geometric_checks(&self) -> Vec<InvariantCheck> {
        let k = self.k;
        let x = self.x();
        let nx = x.len();
        let ball_2k = x.ball(2 * k);
        let mut out = Vec::new();

        let parts = [&self.b, &self.b_prime, &self.s1, &self.s2];
        let mut union = SiteSet::empty(x.region());
        let mut disjoint = true;
        for p in parts {
            disjoint &= union.is_disjoint(p);
            union = union.union(p);
        }
        out.push(check(
            "disjoint-union",
            disjoint && union == ball_2k,
            true,
            format!("|Ball(X,2k)| = {}", ball_2k.len()),
        ));

        let s1_bound = (((2 * k + 1).pow(3) - 1) as usize) * nx;
        out.push(check(
            "volume-S1",
            self.s1.len() <= s1_bound,
            true,
            format!("|S1| = {} vs {}", self.s1.len(), s1_bound),
        ));

        let s2_bound = 80 * (k as usize).pow(3) * nx;
        out.push(check(
            "volume-S2",
            self.s2.len() <= s2_bound,
            k >= 4,
            format!("|S2| = {} vs 80k^3|X| = {}", self.s2.len(), s2_bound),
        ));
        out.push(check(
            "holes-vs-S2",
            self.holes.len() <= self.s2.len(),
            true,
            format!("n = {}, |S2| = {}", self.holes.len(), self.s2.len()),
        ));

        let bad_hole = self.holes.iter().position(|u| u.intersection(&self.s2).is_empty());
        out.push(check(
            "hole-meets-S2",
            bad_hole.is_none(),
            true,
            format!("first hole without S2 point: {bad_hole:?}"),
        ));

        let not_simple = self.holes.iter().position(|u| u.enclosure() != *u);
        out.push(check(
            "holes-simply-connected",
            not_simple.is_none(),
            true,
            format!("first hole with cavities: {not_simple:?}"),
        ));

        let cover = self.outside_ball_k().union(&x.ball(k));
        out.push(check(
            "partition-of-grid",
            cover == SiteSet::full(x.region()),
            true,
            String::new(),
        ));
        out
    }

    /// Geometric checks plus `Ball(B ∪ B', 2k) ∩ Blue = B ∪ B'`.
    pub fn checks(&self, coloring: &CoarseColoring) -> Vec<InvariantCheck> {
        let mut out = self.geometric_checks();
        let x = self.x();
        let blue_near = x.ball(2 * self.k).intersection(&coloring.blue());
        out.push(check(
            "B-prime-blue",
            blue_near == x,
            true,
            format!("{} blue vs {} in X", blue_near.len(), x.len()),
        ));
        out
    }
}
