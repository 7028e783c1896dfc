use std::collections::VecDeque;

use super::CoarseColoring;
use crate::lattice::{cube_offsets, Site, SiteSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtractionError {
    #[error("internal boundary vertex {0} of the origin's domain is red")]
    RedBoundaryVertex(Site),
    #[error("enclosure of the extracted boundary differs from the origin's domain ({enclosure} vs {domain} vertices)")]
    EnclosureMismatch { enclosure: usize, domain: usize },
}

/// The outmost blue boundary `B` of the origin and the blue vertices `B'`
/// hanging off it.
#[derive(Clone, Debug, PartialEq)]
pub struct BlueBoundary {
    pub b: SiteSet,
    pub b_prime: SiteSet,
}

impl BlueBoundary {
    /// `B ∪ B'`.
    pub fn union(&self) -> SiteSet {
        self.b.union(&self.b_prime)
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }
}

/// Red vertices joined to `∂_i Λ_N̂` by a red nearest-neighbour path.
pub fn red_star(coloring: &CoarseColoring) -> SiteSet {
    let red = coloring.red();
    let region = red.region();
    let mut out = SiteSet::empty(region);
    let mut queue = VecDeque::new();
    for i in region.internal_boundary().indices() {
        if red.contains_index(i) && out.insert_index(i) {
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        for w in region.site(i).neighbors() {
            if let Some(j) = region.index(w) {
                if red.contains_index(j) && out.insert_index(j) {
                    queue.push_back(j);
                }
            }
        }
    }
    out
}

/// Blue vertices reachable from `seeds` by steps of `ℓ∞` length at most
/// `2k` through blue vertices (the seeds included).
fn blue_2k_closure(blue: &SiteSet, seeds: &SiteSet, k: i32) -> SiteSet {
    let region = blue.region();
    let offsets = cube_offsets(2 * k);
    let mut out = seeds.clone();
    let mut queue: VecDeque<usize> = seeds.indices().collect();
    while let Some(i) = queue.pop_front() {
        let s = region.site(i);
        for &d in &offsets {
            if let Some(j) = region.index(s + d) {
                if blue.contains_index(j) && out.insert_index(j) {
                    queue.push_back(j);
                }
            }
        }
    }
    out
}

/// Extracts `(B, B')`.
///
/// `D_o` is the component of the origin in `Λ_N̂ ∖ Red*` and `B = ∂_i D_o`
/// (boundary relative to `Z^3`). When the origin is in `Red*` both sets are
/// empty. `B'` collects blue vertices `2k`-connected to `B` through blue
/// vertices, minus `B`.
pub fn extract_outmost_blue_boundary(coloring: &CoarseColoring, k: i32) -> Result<BlueBoundary, ExtractionError> {
    let region = coloring.region();
    let red_star = red_star(coloring);
    if red_star.contains(Site::ORIGIN) {
        return Ok(BlueBoundary {
            b: SiteSet::empty(region),
            b_prime: SiteSet::empty(region),
        });
    }
    let outside = red_star.complement();
    let domain = outside
        .nn_components()
        .into_iter()
        .find(|c| c.contains(Site::ORIGIN))
        .expect("origin lies in the complement of Red*");
    let b = domain.internal_boundary();
    let blue = coloring.blue();
    if let Some(v) = b.iter().find(|&v| !blue.contains(v)) {
        return Err(ExtractionError::RedBoundaryVertex(v));
    }
    let enclosure = b.enclosure();
    if enclosure != domain {
        return Err(ExtractionError::EnclosureMismatch {
            enclosure: enclosure.len(),
            domain: domain.len(),
        });
    }
    let b_prime = blue_2k_closure(&blue, &b, k).difference(&b);
    Ok(BlueBoundary { b, b_prime })
}
