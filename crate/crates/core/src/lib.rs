//! Simulation and verification laboratory for the three-dimensional
//! random-field Ising model and its FK (random-cluster) representation.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`] and [`graph`]: the box `Λ_N`, the coarse grid, coarse site
//!   sets, and interaction graphs with a wired ghost vertex.
//! * [`disorder`]: counter-based Gaussian random fields.
//! * [`exactgibbs`]: Hamiltonian, exhaustive enumeration oracles, heat-bath
//!   sampler.
//! * [`fkising`]: bond configurations, cluster labeling, FK weights with
//!   external field, Edwards–Sokal conditionals and the Swendsen–Wang chain.
//! * [`coarsegrain`]: good boxes, blue/red coloring, outmost blue boundary
//!   and its shell/hole decomposition.
//! * [`peierls`]: reference clusters, the field-flipping map and cluster
//!   weight ratios.
//! * [`metricpartition`]: random bounded partitions of finite metric spaces.
//! * [`lab`]: experiment configuration, pipelines, reports and the invariant
//!   verification suite behind the `rfim-lab` binary.

pub mod coarsegrain;
pub mod disorder;
pub mod exactgibbs;
pub mod fkising;
pub mod graph;
pub mod lab;
pub mod lattice;
pub mod math;
pub mod metricpartition;
pub mod peierls;
pub mod rng;
pub mod stats;
pub mod unionfind;

pub use disorder::{DisorderField, FieldScale};
pub use exactgibbs::{BoundaryCondition, SpinConfig, Temperature};
pub use fkising::{BondConfig, ClusterLabeling, EdgeProbability};
pub use graph::{Graph, LatticeGraph, Wiring};
pub use lattice::{CoarseGrid, Region, Site, SiteSet};
