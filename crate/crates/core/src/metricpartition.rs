//! Random bounded partitions of finite metric spaces (CKR scheme) and the
//! padding estimate
//!
//! ```text
//! P(B(x, r) ⊄ P(x)) ≤ (8r/R) · H(|B(x, R/8)|, |B(x, R)|),   H(s, t) = Σ_{n=s+1}^{t} 1/n.
//! ```

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::lattice::Site;
use crate::stats::{mean_stderr, Estimate};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PartitionError {
    #[error("harmonic sum needs 0 < s < t, got s = {s}, t = {t}")]
    HarmonicRange { s: u64, t: u64 },
    #[error("scale R must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("padding radius must satisfy 0 < r < R/8, got r = {r}, R = {big_r}")]
    RadiusRange { r: f64, big_r: f64 },
    #[error("point index {0} out of range")]
    PointOutOfRange(usize),
    #[error("metric axiom violated at ({0}, {1}, {2})")]
    NotAMetric(usize, usize, usize),
    #[error("empty point set")]
    Empty,
}

pub trait FiniteMetricSpace {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn distance(&self, a: usize, b: usize) -> f64;

    /// Indices `y` with `d(x, y) ≤ radius`, in increasing order.
    fn ball(&self, x: usize, radius: f64) -> Vec<usize> {
        (0..self.len()).filter(|&y| self.distance(x, y) <= radius).collect()
    }
}

/// Points on the real line.
#[derive(Clone, Debug)]
pub struct LinePoints(pub Vec<f64>);

impl FiniteMetricSpace for LinePoints {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn distance(&self, a: usize, b: usize) -> f64 {
        (self.0[a] - self.0[b]).abs()
    }
}

/// Lattice sites under `d_∞`, with an `x`-sorted index for ball queries.
#[derive(Clone, Debug)]
pub struct LinfSites {
    sites: Vec<Site>,
    by_x: Vec<usize>,
}

impl LinfSites {
    pub fn new(sites: Vec<Site>) -> Self {
        let mut by_x: Vec<usize> = (0..sites.len()).collect();
        by_x.sort_by_key(|&i| (sites[i].x, i));
        LinfSites { sites, by_x }
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }
}

impl FiniteMetricSpace for LinfSites {
    fn len(&self) -> usize {
        self.sites.len()
    }

    fn distance(&self, a: usize, b: usize) -> f64 {
        self.sites[a].linf(self.sites[b]) as f64
    }

    fn ball(&self, x: usize, radius: f64) -> Vec<usize> {
        let c = self.sites[x];
        let r = radius.floor() as i64;
        let lo = self
            .by_x
            .partition_point(|&i| (self.sites[i].x as i64) < c.x as i64 - r);
        let hi = self
            .by_x
            .partition_point(|&i| (self.sites[i].x as i64) <= c.x as i64 + r);
        let mut out: Vec<usize> = self.by_x[lo..hi]
            .iter()
            .copied()
            .filter(|&i| self.sites[i].linf(c) as f64 <= radius)
            .collect();
        out.sort_unstable();
        out
    }
}

/// An explicit symmetric distance matrix.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(n: usize, d: Vec<f64>) -> Result<Self, PartitionError> {
        assert_eq!(d.len(), n * n);
        let m = DistanceMatrix { n, d };
        for a in 0..n {
            for b in 0..n {
                let x = m.distance(a, b);
                if x.is_nan() || x < 0.0 || x != m.distance(b, a) || (a == b) != (x == 0.0) {
                    return Err(PartitionError::NotAMetric(a, b, b));
                }
            }
        }
        Ok(m)
    }
}

impl FiniteMetricSpace for DistanceMatrix {
    fn len(&self) -> usize {
        self.n
    }

    fn distance(&self, a: usize, b: usize) -> f64 {
        self.d[a * self.n + b]
    }
}

/// Spot-checks symmetry, `d(x, x) = 0` and the triangle inequality on
/// `triples` random triples.
pub fn check_metric_axioms<M: FiniteMetricSpace, R: Rng>(
    space: &M,
    triples: usize,
    rng: &mut R,
) -> Result<(), PartitionError> {
    let n = space.len();
    if n == 0 {
        return Err(PartitionError::Empty);
    }
    for _ in 0..triples {
        let (a, b, c) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
        let (ab, bc, ac) = (space.distance(a, b), space.distance(b, c), space.distance(a, c));
        let ok = space.distance(a, a) == 0.0 && ab == space.distance(b, a) && ac <= ab + bc + 1e-12 * (ab + bc);
        if !ok {
            return Err(PartitionError::NotAMetric(a, b, c));
        }
    }
    Ok(())
}

/// `H(s, t) = Σ_{n=s+1}^{t} 1/n`, summed from the small terms up.
pub fn harmonic_h(s: u64, t: u64) -> Result<f64, PartitionError> {
    if s == 0 || s >= t {
        return Err(PartitionError::HarmonicRange { s, t });
    }
    Ok((s + 1..=t).rev().map(|n| 1.0 / n as f64).sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionResult {
    /// Block id of each point.
    pub block_of: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
    pub alpha: f64,
    pub scale: f64,
}

impl PartitionResult {
    /// Every point in exactly one block and the two views agree.
    pub fn is_partition(&self, n: usize) -> bool {
        if self.block_of.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for (id, block) in self.blocks.iter().enumerate() {
            if block.is_empty() {
                return false;
            }
            for &x in block {
                if x >= n || seen[x] || self.block_of[x] != id {
                    return false;
                }
                seen[x] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn max_block_diameter<M: FiniteMetricSpace>(&self, space: &M) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                b.iter()
                    .flat_map(|&x| b.iter().map(move |&y| (x, y)))
                    .map(|(x, y)| space.distance(x, y))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `B(x, r) ⊆ P(x)`.
    pub fn is_padded<M: FiniteMetricSpace>(&self, space: &M, x: usize, r: f64) -> bool {
        let id = self.block_of[x];
        space.ball(x, r).into_iter().all(|y| self.block_of[y] == id)
    }
}

/// CKR partition: `α ~ U[1/4, 1/2)`, a uniform ordering of the points, and
/// each point joins the first center within `αR`. Every block lies in a
/// ball of radius `αR < R/2`.
pub fn ckr_partition<M: FiniteMetricSpace, R: Rng + ?Sized>(
    space: &M,
    scale: f64,
    rng: &mut R,
) -> Result<PartitionResult, PartitionError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(PartitionError::BadScale(scale));
    }
    let n = space.len();
    let alpha = rng.random_range(0.25..0.5);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let radius = alpha * scale;
    let mut block_of = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut assigned = 0;
    for &c in &order {
        if assigned == n {
            break;
        }
        let members: Vec<usize> = space
            .ball(c, radius)
            .into_iter()
            .filter(|&y| block_of[y] == usize::MAX)
            .collect();
        if members.is_empty() {
            continue;
        }
        for &y in &members {
            block_of[y] = blocks.len();
        }
        assigned += members.len();
        blocks.push(members);
    }
    Ok(PartitionResult {
        block_of,
        blocks,
        alpha,
        scale,
    })
}

pub fn ball_size<M: FiniteMetricSpace>(space: &M, x: usize, radius: f64) -> usize {
    space.ball(x, radius).len()
}

/// `(8r/R) · H(|B(x, R/8)|, |B(x, R)|)`, zero when the two balls coincide.
pub fn padding_bound<M: FiniteMetricSpace>(space: &M, x: usize, scale: f64, r: f64) -> f64 {
    let s = ball_size(space, x, scale / 8.0) as u64;
    let t = ball_size(space, x, scale) as u64;
    if s == t {
        return 0.0;
    }
    8.0 * r / scale * harmonic_h(s, t).expect("nested balls")
}

#[derive(Clone, Debug, Serialize)]
pub struct PaddingEstimate {
    pub rate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub samples: usize,
}

/// Monte Carlo frequency of `B(x, r) ⊄ P(x)`.
pub fn padding_rate<M: FiniteMetricSpace, R: Rng + ?Sized>(
    space: &M,
    scale: f64,
    r: f64,
    x: usize,
    samples: usize,
    rng: &mut R,
) -> Result<PaddingEstimate, PartitionError> {
    if x >= space.len() {
        return Err(PartitionError::PointOutOfRange(x));
    }
    if !(r > 0.0 && r < scale / 8.0) {
        return Err(PartitionError::RadiusRange { r, big_r: scale });
    }
    let hits: Vec<f64> = (0..samples)
        .map(|_| {
            let p = ckr_partition(space, scale, rng).expect("positive scale");
            (!p.is_padded(space, x, r)) as u8 as f64
        })
        .collect();
    let Estimate { mean, stderr } = mean_stderr(&hits);
    Ok(PaddingEstimate {
        rate: mean,
        stderr,
        bound: padding_bound(space, x, scale, r),
        samples,
    })
}

/// Partition of a coarse boundary set with `R = q^4`, padding radius 16.
#[derive(Clone, Debug)]
pub struct BoundaryPartition {
    pub partition: PartitionResult,
    pub padded: Vec<bool>,
    /// Padded only because `B(x, 16) = {x}`.
    pub degenerate: Vec<bool>,
    pub scale: f64,
    pub radius: f64,
}

pub const BOUNDARY_PADDING_RADIUS: f64 = 16.0;

impl BoundaryPartition {
    /// `|P^b| / |X|`.
    pub fn boundary_fraction(&self) -> f64 {
        let n = self.padded.len();
        self.padded.iter().filter(|&&p| !p).count() as f64 / n as f64
    }

    /// `c_1` such that the boundary fraction equals `c_1 ln R / R`.
    pub fn c1(&self) -> f64 {
        self.boundary_fraction() * self.scale / self.scale.ln()
    }

    /// CSV with columns `point,x,y,z,block,padded`.
    pub fn write_csv<W: Write>(&self, sites: &[Site], w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["point", "x", "y", "z", "block", "padded"])?;
        for (i, s) in sites.iter().enumerate() {
            out.write_record([
                i.to_string(),
                s.x.to_string(),
                s.y.to_string(),
                s.z.to_string(),
                self.partition.block_of[i].to_string(),
                (self.padded[i] as u8).to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn partition_boundary_set<R: Rng + ?Sized>(
    sites: &[Site],
    q: i32,
    rng: &mut R,
) -> Result<BoundaryPartition, PartitionError> {
    if sites.is_empty() {
        return Err(PartitionError::Empty);
    }
    let space = LinfSites::new(sites.to_vec());
    let scale = (q as f64).powi(4);
    let partition = ckr_partition(&space, scale, rng)?;
    let mut padded = Vec::with_capacity(sites.len());
    let mut degenerate = Vec::with_capacity(sites.len());
    for x in 0..sites.len() {
        let ball = space.ball(x, BOUNDARY_PADDING_RADIUS);
        let id = partition.block_of[x];
        padded.push(ball.iter().all(|&y| partition.block_of[y] == id));
        degenerate.push(ball.len() == 1);
    }
    Ok(BoundaryPartition {
        partition,
        padded,
        degenerate,
        scale,
        radius: BOUNDARY_PADDING_RADIUS,
    })
}
