//! Coarse graining: good boxes, auxiliary variables, the blue/red coloring,
//! the outmost blue boundary and its shell/hole decomposition.

mod boundary;
mod decomposition;
mod goodbox;
mod record;

pub use boundary::{extract_outmost_blue_boundary, red_star, BlueBoundary, ExtractionError};
pub use decomposition::{decompose, Decomposition, DecompositionError, InvariantCheck};
pub use goodbox::{
    calibrate_cg, estimate_goodbox_probability, is_good_box, is_good_box_at, CgCalibration, GoodBoxEstimate,
    GoodBoxTester,
};
pub use record::{parse_record, RecordError};

use serde::{Deserialize, Serialize};

use crate::fkising::BondConfig;
use crate::graph::LatticeGraph;
use crate::lattice::{CoarseGrid, Region, Site, SiteSet};
use crate::rng::splitmix64;

/// `p_aux = 1 − exp(−c_g q / 250)`.
pub fn aux_probability(c_g: f64, q: i32) -> f64 {
    -(-c_g * q as f64 / 250.0).exp_m1()
}

/// I.i.d. Bernoulli(`p_aux`) bits on the coarse grid; bit `v` depends only
/// on `(seed, v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxConfig {
    region: Region,
    bits: Vec<bool>,
    seed: u64,
    p_aux: f64,
}

impl AuxConfig {
    pub fn sample(region: Region, p_aux: f64, seed: u64) -> Self {
        let bits = (0..region.len())
            .map(|i| {
                let u = (splitmix64(seed ^ splitmix64(i as u64)) >> 11) as f64 / (1u64 << 53) as f64;
                u < p_aux
            })
            .collect();
        AuxConfig {
            region,
            bits,
            seed,
            p_aux,
        }
    }

    pub fn constant(region: Region, value: bool) -> Self {
        AuxConfig {
            region,
            bits: vec![value; region.len()],
            seed: 0,
            p_aux: if value { 1.0 } else { 0.0 },
        }
    }

    pub fn from_bits(region: Region, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), region.len());
        AuxConfig {
            region,
            bits,
            seed: 0,
            p_aux: f64::NAN,
        }
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn get(&self, v: Site) -> bool {
        self.bits[self.region.index(v).expect("coarse site inside grid")]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn p_aux(&self) -> f64 {
        self.p_aux
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Blue,
    Red,
}

/// Good flags, aux bits and colors on the coarse grid. A vertex is red iff
/// its box is good and its aux bit is 1.
#[derive(Clone, Debug, PartialEq)]
pub struct CoarseColoring {
    grid: CoarseGrid,
    good: Vec<bool>,
    aux: Vec<bool>,
}

impl CoarseColoring {
    pub fn new(grid: CoarseGrid, good: Vec<bool>, aux: Vec<bool>) -> Self {
        assert_eq!(good.len(), grid.coarse().len());
        assert_eq!(aux.len(), grid.coarse().len());
        CoarseColoring { grid, good, aux }
    }

    /// A coloring with the given red set (good and aux forced accordingly).
    pub fn from_red(grid: CoarseGrid, red: &SiteSet) -> Self {
        CoarseColoring::new(grid, red.mask().to_vec(), red.mask().to_vec())
    }

    pub fn grid(&self) -> &CoarseGrid {
        &self.grid
    }

    pub fn region(&self) -> Region {
        self.grid.coarse()
    }

    pub fn is_good(&self, v: Site) -> bool {
        self.good[self.region().index(v).expect("coarse site inside grid")]
    }

    pub fn good_flags(&self) -> &[bool] {
        &self.good
    }

    pub fn color_at_index(&self, i: usize) -> Color {
        if self.good[i] && self.aux[i] {
            Color::Red
        } else {
            Color::Blue
        }
    }

    pub fn color(&self, v: Site) -> Color {
        self.color_at_index(self.region().index(v).expect("coarse site inside grid"))
    }

    pub fn red(&self) -> SiteSet {
        let region = self.region();
        SiteSet::from_mask(
            region,
            (0..region.len())
                .map(|i| self.color_at_index(i) == Color::Red)
                .collect(),
        )
    }

    pub fn blue(&self) -> SiteSet {
        self.red().complement()
    }
}

/// Colors every coarse vertex from the good-box test on `ω` and `aux`.
pub fn color(lattice: &LatticeGraph, grid: &CoarseGrid, bonds: &BondConfig, aux: &AuxConfig) -> CoarseColoring {
    assert_eq!(lattice.region(), grid.fine(), "lattice and grid disagree");
    assert_eq!(aux.region(), grid.coarse(), "aux bits on the wrong grid");
    let coarse = grid.coarse();
    let mut tester = GoodBoxTester::new(grid.q());
    let good = (0..coarse.len())
        .map(|i| tester.is_good(lattice, bonds, grid.center(coarse.site(i))))
        .collect();
    CoarseColoring::new(*grid, good, aux.bits().to_vec())
}
