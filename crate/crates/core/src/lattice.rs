//! Cubic boxes `Λ_N = [-N, N]^3 ∩ Z^3`, site sets on them, and the coarse
//! grid of overlapping blocks `Q_v = qv + [-q, q]^3`.

use std::collections::VecDeque;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("half side must be non-negative, got {0}")]
    NegativeHalfSide(i64),
    #[error("half side {0} is too large")]
    TooLarge(i64),
    #[error("q = {q} must be at least 1 and divide N + 1 = {}", .n + 1)]
    NotDivisible { n: i32, q: i32 },
    #[error("site {0} lies outside the region")]
    OutOfRegion(Site),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

/// Unit steps `+x, -x, +y, -y, +z, -z`.
pub const DIRECTIONS: [Site; 6] = [
    Site::new(1, 0, 0),
    Site::new(-1, 0, 0),
    Site::new(0, 1, 0),
    Site::new(0, -1, 0),
    Site::new(0, 0, 1),
    Site::new(0, 0, -1),
];

impl Site {
    pub const ORIGIN: Site = Site::new(0, 0, 0);

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Site { x, y, z }
    }

    pub fn coords(self) -> [i32; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_coords(c: [i32; 3]) -> Self {
        Site::new(c[0], c[1], c[2])
    }

    pub fn linf(self, other: Site) -> i32 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }

    pub fn norm_inf(self) -> i32 {
        self.linf(Site::ORIGIN)
    }

    pub fn neighbors(self) -> [Site; 6] {
        DIRECTIONS.map(|d| self + d)
    }
}

impl Add for Site {
    type Output = Site;
    fn add(self, o: Site) -> Site {
        Site::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Site {
    type Output = Site;
    fn sub(self, o: Site) -> Site {
        Site::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<Site> for i32 {
    type Output = Site;
    fn mul(self, s: Site) -> Site {
        Site::new(self * s.x, self * s.y, self * s.z)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// The box `Λ_N` with sites indexed lexicographically, `x` slowest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    half_side: i32,
}

impl Region {
    pub fn new(half_side: i64) -> Result<Self, LatticeError> {
        if half_side < 0 {
            return Err(LatticeError::NegativeHalfSide(half_side));
        }
        if half_side > 600 {
            return Err(LatticeError::TooLarge(half_side));
        }
        Ok(Region {
            half_side: half_side as i32,
        })
    }

    pub fn half_side(&self) -> i32 {
        self.half_side
    }

    pub fn side(&self) -> usize {
        (2 * self.half_side + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.side().pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, s: Site) -> bool {
        s.norm_inf() <= self.half_side
    }

    pub fn index(&self, s: Site) -> Option<usize> {
        self.contains(s).then(|| self.index_unchecked(s))
    }

    #[inline]
    pub fn index_unchecked(&self, s: Site) -> usize {
        let n = self.half_side;
        let side = self.side();
        ((s.x + n) as usize * side + (s.y + n) as usize) * side + (s.z + n) as usize
    }

    #[inline]
    pub fn site(&self, index: usize) -> Site {
        let side = self.side();
        let n = self.half_side;
        let z = (index % side) as i32 - n;
        let y = ((index / side) % side) as i32 - n;
        let x = (index / (side * side)) as i32 - n;
        Site::new(x, y, z)
    }

    pub fn origin_index(&self) -> usize {
        self.index_unchecked(Site::ORIGIN)
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.len()).map(move |i| self.site(i))
    }

    pub fn is_on_internal_boundary(&self, s: Site) -> bool {
        self.contains(s) && s.norm_inf() == self.half_side
    }

    /// Nearest-neighbour pairs inside the box, ordered by the lower site
    /// index and then by axis `x, y, z`.
    pub fn internal_edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::with_capacity(3 * self.len());
        for i in 0..self.len() {
            let s = self.site(i);
            for d in [DIRECTIONS[0], DIRECTIONS[2], DIRECTIONS[4]] {
                if let Some(j) = self.index(s + d) {
                    edges.push((i, j));
                }
            }
        }
        edges
    }

    /// Pairs `(u, w)` with `u` inside and `w` outside, ordered by `u` and then
    /// by direction as in [`DIRECTIONS`].
    pub fn boundary_edges(&self) -> Vec<(usize, Site)> {
        let mut edges = Vec::new();
        for i in 0..self.len() {
            let s = self.site(i);
            if s.norm_inf() < self.half_side {
                continue;
            }
            for w in s.neighbors() {
                if !self.contains(w) {
                    edges.push((i, w));
                }
            }
        }
        edges
    }

    /// `∂_i Λ_N`: sites with a neighbour outside the box.
    pub fn internal_boundary(&self) -> SiteSet {
        let mut set = SiteSet::empty(*self);
        for i in 0..self.len() {
            if self.site(i).norm_inf() == self.half_side {
                set.insert_index(i);
            }
        }
        set
    }
}

/// A subset of a [`Region`], stored as a membership mask.
#[derive(Clone, PartialEq, Eq)]
pub struct SiteSet {
    region: Region,
    mask: Vec<bool>,
    count: usize,
}

impl fmt::Debug for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl SiteSet {
    pub fn empty(region: Region) -> Self {
        SiteSet {
            region,
            mask: vec![false; region.len()],
            count: 0,
        }
    }

    pub fn full(region: Region) -> Self {
        SiteSet {
            region,
            mask: vec![true; region.len()],
            count: region.len(),
        }
    }

    pub fn from_sites<I: IntoIterator<Item = Site>>(region: Region, sites: I) -> Result<Self, LatticeError> {
        let mut set = SiteSet::empty(region);
        for s in sites {
            let i = region.index(s).ok_or(LatticeError::OutOfRegion(s))?;
            set.insert_index(i);
        }
        Ok(set)
    }

    pub fn from_mask(region: Region, mask: Vec<bool>) -> Self {
        assert_eq!(mask.len(), region.len(), "mask length does not match region");
        let count = mask.iter().filter(|&&b| b).count();
        SiteSet { region, mask, count }
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn contains(&self, s: Site) -> bool {
        self.region.index(s).is_some_and(|i| self.mask[i])
    }

    #[inline]
    pub fn contains_index(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn insert(&mut self, s: Site) -> Result<bool, LatticeError> {
        let i = self.region.index(s).ok_or(LatticeError::OutOfRegion(s))?;
        Ok(self.insert_index(i))
    }

    pub fn insert_index(&mut self, i: usize) -> bool {
        if self.mask[i] {
            return false;
        }
        self.mask[i] = true;
        self.count += 1;
        true
    }

    pub fn remove_index(&mut self, i: usize) -> bool {
        if !self.mask[i] {
            return false;
        }
        self.mask[i] = false;
        self.count -= 1;
        true
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = Site> + '_ {
        self.indices().map(move |i| self.region.site(i))
    }

    fn zip_with(&self, other: &SiteSet, f: impl Fn(bool, bool) -> bool) -> SiteSet {
        assert_eq!(self.region, other.region, "site sets live on different regions");
        let mask = self.mask.iter().zip(&other.mask).map(|(&a, &b)| f(a, b)).collect();
        SiteSet::from_mask(self.region, mask)
    }

    pub fn union(&self, other: &SiteSet) -> SiteSet {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &SiteSet) -> SiteSet {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &SiteSet) -> SiteSet {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> SiteSet {
        SiteSet::from_mask(self.region, self.mask.iter().map(|&b| !b).collect())
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    pub fn is_disjoint(&self, other: &SiteSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !(a && b))
    }

    /// `Ball(A, k) = {v ∈ region : d_∞(v, A) ≤ k}`.
    pub fn ball(&self, k: i32) -> SiteSet {
        let mut mask = self.mask.clone();
        if k > 0 {
            for axis in 0..3 {
                dilate_axis(&mut mask, self.region.side(), axis, k as usize);
            }
        }
        SiteSet::from_mask(self.region, mask)
    }

    /// Members with a nearest neighbour outside the set; sites outside the
    /// region count as outside the set.
    pub fn internal_boundary(&self) -> SiteSet {
        let mut out = SiteSet::empty(self.region);
        for i in self.indices() {
            let s = self.region.site(i);
            if s.neighbors().iter().any(|&w| !self.contains(w)) {
                out.insert_index(i);
            }
        }
        out
    }

    /// Non-members of the region adjacent to a member.
    pub fn external_boundary(&self) -> SiteSet {
        let mut out = SiteSet::empty(self.region);
        for i in self.indices() {
            let s = self.region.site(i);
            for w in s.neighbors() {
                if let Some(j) = self.region.index(w) {
                    if !self.mask[j] {
                        out.insert_index(j);
                    }
                }
            }
        }
        out
    }

    /// `ψ(A)`: the region minus every site joined to `∂_i(region)` by a
    /// nearest-neighbour path avoiding `A`.
    pub fn enclosure(&self) -> SiteSet {
        let region = self.region;
        let mut reached = vec![false; region.len()];
        let mut queue = VecDeque::new();
        for i in region.internal_boundary().indices() {
            if !self.mask[i] {
                reached[i] = true;
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            for w in region.site(i).neighbors() {
                if let Some(j) = region.index(w) {
                    if !self.mask[j] && !reached[j] {
                        reached[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        SiteSet::from_mask(region, reached.into_iter().map(|r| !r).collect())
    }

    /// Nearest-neighbour connected components, ordered by smallest index.
    pub fn nn_components(&self) -> Vec<SiteSet> {
        self.components_by(|s| s.neighbors().to_vec())
    }

    /// Components under `u ~ v ⇔ d_∞(u, v) ≤ k`, ordered by smallest index.
    pub fn k_components(&self, k: i32) -> Vec<SiteSet> {
        let offsets = cube_offsets(k);
        self.components_by(|s| offsets.iter().map(|&d| s + d).collect())
    }

    fn components_by(&self, adjacent: impl Fn(Site) -> Vec<Site>) -> Vec<SiteSet> {
        let region = self.region;
        let mut seen = vec![false; region.len()];
        let mut components = Vec::new();
        for start in self.indices() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut component = SiteSet::empty(region);
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                component.insert_index(i);
                for w in adjacent(region.site(i)) {
                    if let Some(j) = region.index(w) {
                        if self.mask[j] && !seen[j] {
                            seen[j] = true;
                            queue.push_back(j);
                        }
                    }
                }
            }
            components.push(component);
        }
        components
    }

    pub fn touches_region_boundary(&self) -> bool {
        let n = self.region.half_side;
        self.iter().any(|s| s.norm_inf() == n)
    }

    /// `d_∞` from `s` to the nearest member, or `None` for the empty set.
    pub fn linf_distance_to(&self, s: Site) -> Option<i32> {
        self.iter().map(|t| t.linf(s)).min()
    }
}

/// All nonzero offsets with `ℓ∞` norm at most `k`.
pub fn cube_offsets(k: i32) -> Vec<Site> {
    let mut out = Vec::with_capacity(((2 * k + 1).pow(3) - 1).max(0) as usize);
    for x in -k..=k {
        for y in -k..=k {
            for z in -k..=k {
                if (x, y, z) != (0, 0, 0) {
                    out.push(Site::new(x, y, z));
                }
            }
        }
    }
    out
}

fn dilate_axis(mask: &mut [bool], side: usize, axis: usize, k: usize) {
    let stride = side.pow(2 - axis as u32);
    let mut line = vec![false; side];
    let mut prefix = vec![0u32; side + 1];
    for base in 0..mask.len() {
        // visit each line once, from its first element
        if !(base / stride).is_multiple_of(side) {
            continue;
        }
        for t in 0..side {
            line[t] = mask[base + t * stride];
            prefix[t + 1] = prefix[t] + line[t] as u32;
        }
        for t in 0..side {
            let lo = t.saturating_sub(k);
            let hi = (t + k + 1).min(side);
            mask[base + t * stride] = prefix[hi] > prefix[lo];
        }
    }
}

/// The coarse grid of boxes `Q_v = qv + [-q, q]^3`, `v ∈ Λ_{N̂}`, with
/// `N̂ = (N + 1)/q - 1`, so that `⋃_v Q_v = Λ_{N+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoarseGrid {
    fine: Region,
    coarse: Region,
    q: i32,
}

impl CoarseGrid {
    pub fn new(fine: Region, q: i32) -> Result<Self, LatticeError> {
        let n = fine.half_side();
        if q < 1 || (n + 1) % q != 0 {
            return Err(LatticeError::NotDivisible { n, q });
        }
        let coarse = Region::new(((n + 1) / q - 1) as i64)?;
        Ok(CoarseGrid { fine, coarse, q })
    }

    /// The grid with coarse half side `n_hat`, i.e. `N = q(n_hat + 1) - 1`.
    pub fn with_coarse_half_side(n_hat: i32, q: i32) -> Result<Self, LatticeError> {
        let n = q as i64 * (n_hat as i64 + 1) - 1;
        CoarseGrid::new(Region::new(n)?, q)
    }

    pub fn fine(&self) -> Region {
        self.fine
    }

    pub fn coarse(&self) -> Region {
        self.coarse
    }

    /// `Λ_{N+1}`, which contains every block.
    pub fn extended(&self) -> Region {
        Region {
            half_side: self.fine.half_side + 1,
        }
    }

    pub fn q(&self) -> i32 {
        self.q
    }

    pub fn center(&self, v: Site) -> Site {
        self.q * v
    }

    pub fn block_contains(&self, v: Site, s: Site) -> bool {
        s.linf(self.center(v)) <= self.q
    }

    /// Sites of `Q_v` in lexicographic order; some may lie outside `Λ_N`.
    pub fn block_sites(&self, v: Site) -> impl Iterator<Item = Site> {
        let c = self.center(v);
        let q = self.q;
        (-q..=q).flat_map(move |x| (-q..=q).flat_map(move |y| (-q..=q).map(move |z| c + Site::new(x, y, z))))
    }

    /// `Q_A` as a set on `Λ_{N+1}`.
    pub fn fine_set(&self, coarse_set: &SiteSet) -> SiteSet {
        assert_eq!(coarse_set.region(), self.coarse, "coarse set on a different region");
        let ext = self.extended();
        let mut out = SiteSet::empty(ext);
        for v in coarse_set.iter() {
            for s in self.block_sites(v) {
                out.insert_index(ext.index_unchecked(s));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_ball(set: &SiteSet, k: i32) -> SiteSet {
        let region = set.region();
        let mut out = SiteSet::empty(region);
        for s in region.sites() {
            if set.iter().any(|t| t.linf(s) <= k) {
                out.insert(s).unwrap();
            }
        }
        out
    }

    #[test]
    fn index_round_trip() {
        let r = Region::new(3).unwrap();
        for i in 0..r.len() {
            assert_eq!(r.index(r.site(i)), Some(i));
        }
        assert_eq!(r.site(r.origin_index()), Site::ORIGIN);
    }

    #[test]
    fn edge_counts() {
        let r = Region::new(2).unwrap();
        let l = r.side();
        assert_eq!(r.internal_edges().len(), 3 * l * l * (l - 1));
        assert_eq!(r.boundary_edges().len(), 6 * l * l);
        assert_eq!(Region::new(0).unwrap().boundary_edges().len(), 6);
    }

    #[test]
    fn ball_matches_brute_force() {
        let r = Region::new(4).unwrap();
        let set = SiteSet::from_sites(r, [Site::new(0, 0, 0), Site::new(3, -4, 1), Site::new(-2, 2, 2)]).unwrap();
        for k in 0..4 {
            assert_eq!(set.ball(k), brute_ball(&set, k));
        }
    }

    #[test]
    fn enclosure_of_shell_fills_the_inside() {
        let r = Region::new(4).unwrap();
        let core = SiteSet::from_sites(r, [Site::ORIGIN]).unwrap().ball(1);
        let shell = core.ball(1).difference(&core);
        assert_eq!(shell.enclosure(), core.ball(1));
        let mut leaky = shell.clone();
        leaky.remove_index(r.index_unchecked(Site::new(2, 0, 0)));
        assert_eq!(leaky.enclosure(), leaky);
    }

    #[test]
    fn internal_boundary_is_relative_to_z3() {
        let r = Region::new(2).unwrap();
        let full = SiteSet::full(r);
        assert_eq!(full.internal_boundary(), r.internal_boundary());
        assert!(full.external_boundary().is_empty());
    }

    #[test]
    fn k_components_merge_at_distance_k() {
        let r = Region::new(4).unwrap();
        let set = SiteSet::from_sites(r, [Site::new(0, 0, 0), Site::new(2, 2, 0), Site::new(-4, -4, -4)]).unwrap();
        assert_eq!(set.nn_components().len(), 3);
        assert_eq!(set.k_components(1).len(), 3);
        assert_eq!(set.k_components(2).len(), 2);
    }

    #[test]
    fn coarse_blocks_cover_extended_region() {
        let grid = CoarseGrid::new(Region::new(7).unwrap(), 4).unwrap();
        assert_eq!(grid.coarse().half_side(), 1);
        let all = grid.fine_set(&SiteSet::full(grid.coarse()));
        assert_eq!(all.len(), grid.extended().len());
        assert!(CoarseGrid::new(Region::new(6).unwrap(), 4).is_err());
    }

    #[test]
    fn blocks_are_disjoint_beyond_distance_two() {
        let grid = CoarseGrid::with_coarse_half_side(3, 2).unwrap();
        let c = grid.coarse();
        for u in c.sites() {
            for v in c.sites() {
                let shared = grid.block_sites(u).any(|s| grid.block_contains(v, s));
                assert_eq!(shared, u.linf(v) <= 2, "{u} {v}");
            }
        }
    }
}
