//! Finite interaction graphs with a wired ghost vertex.
//!
//! Sites are `0..n_sites`; the ghost vertex has index `n_sites` and stands
//! for the exterior boundary held at the boundary spin. Bonds are numbered
//! internal edges first, then ghost edges.

use crate::lattice::{Region, Site, DIRECTIONS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("edge ({0}, {1}) references a vertex outside 0..{2}")]
    VertexOutOfRange(u32, u32, usize),
    #[error("self loop at vertex {0}")]
    SelfLoop(u32),
    #[error("origin {0} outside 0..{1}")]
    BadOrigin(usize, usize),
    #[error("graph has no sites")]
    Empty,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n_sites: usize,
    edges: Vec<[u32; 2]>,
    ghost_edges: Vec<u32>,
    origin: usize,
    // CSR adjacency over bonds, the ghost included as a vertex
    offsets: Vec<u32>,
    incident: Vec<(u32, u32)>,
}

impl Graph {
    /// `ghost_edges[i] = u` joins site `u` to the ghost. Parallel ghost edges
    /// are allowed (a corner of a box has three).
    pub fn new(n_sites: usize, edges: Vec<[u32; 2]>, ghost_edges: Vec<u32>, origin: usize) -> Result<Self, GraphError> {
        if n_sites == 0 {
            return Err(GraphError::Empty);
        }
        if origin >= n_sites {
            return Err(GraphError::BadOrigin(origin, n_sites));
        }
        for &[u, v] in &edges {
            if u as usize >= n_sites || v as usize >= n_sites {
                return Err(GraphError::VertexOutOfRange(u, v, n_sites));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
        }
        for &u in &ghost_edges {
            if u as usize >= n_sites {
                return Err(GraphError::VertexOutOfRange(u, n_sites as u32, n_sites));
            }
        }
        let mut g = Graph {
            n_sites,
            edges,
            ghost_edges,
            origin,
            offsets: Vec::new(),
            incident: Vec::new(),
        };
        g.build_adjacency();
        Ok(g)
    }

    fn build_adjacency(&mut self) {
        let nv = self.n_sites + 1;
        let mut degree = vec![0u32; nv];
        for b in 0..self.n_bonds() {
            let (u, v) = self.bond_endpoints(b);
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = vec![0u32; nv + 1];
        for i in 0..nv {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut incident = vec![(0, 0); offsets[nv] as usize];
        for b in 0..self.n_bonds() {
            let (u, v) = self.bond_endpoints(b);
            incident[fill[u] as usize] = (v as u32, b as u32);
            fill[u] += 1;
            incident[fill[v] as usize] = (u as u32, b as u32);
            fill[v] += 1;
        }
        self.offsets = offsets;
        self.incident = incident;
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn ghost(&self) -> usize {
        self.n_sites
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn ghost_edges(&self) -> &[u32] {
        &self.ghost_edges
    }

    pub fn n_internal_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_bonds(&self) -> usize {
        self.edges.len() + self.ghost_edges.len()
    }

    pub fn is_ghost_bond(&self, b: usize) -> bool {
        b >= self.edges.len()
    }

    /// Endpoints of bond `b`; for ghost bonds the second is [`Graph::ghost`].
    #[inline]
    pub fn bond_endpoints(&self, b: usize) -> (usize, usize) {
        match self.edges.get(b) {
            Some(&[u, v]) => (u as usize, v as usize),
            None => (self.ghost_edges[b - self.edges.len()] as usize, self.n_sites),
        }
    }

    /// `(neighbour, bond)` pairs at vertex `v` (the ghost included).
    #[inline]
    pub fn incident(&self, v: usize) -> &[(u32, u32)] {
        &self.incident[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    /// A copy with every ghost edge removed.
    pub fn without_ghost_edges(&self) -> Graph {
        Graph::new(self.n_sites, self.edges.clone(), Vec::new(), self.origin).expect("valid graph")
    }
}

/// How the exterior of `Λ_N` enters the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Wiring {
    /// Every boundary edge joins the site to the ghost.
    Wired,
    /// No boundary edges.
    Free,
}

/// The nearest-neighbour graph of `Λ_N` plus the ghost vertex.
#[derive(Clone, Debug)]
pub struct LatticeGraph {
    region: Region,
    wiring: Wiring,
    graph: Graph,
    // bond id of the edge from site i in direction +x, +y, +z (u32::MAX if absent)
    forward: Vec<[u32; 3]>,
    // bond id of the ghost edge from site i in each of the six directions
    ghost: Vec<[u32; 6]>,
}

pub const NO_BOND: u32 = u32::MAX;

impl LatticeGraph {
    pub fn new(region: Region, wiring: Wiring) -> Self {
        let n = region.len();
        let mut forward = vec![[NO_BOND; 3]; n];
        let mut ghost = vec![[NO_BOND; 6]; n];
        let mut edges = Vec::with_capacity(3 * n);
        for (i, j) in region.internal_edges() {
            let d = region.site(j) - region.site(i);
            let axis = if d.x == 1 {
                0
            } else if d.y == 1 {
                1
            } else {
                2
            };
            forward[i][axis] = edges.len() as u32;
            edges.push([i as u32, j as u32]);
        }
        let mut ghost_edges = Vec::new();
        if wiring == Wiring::Wired {
            for (i, w) in region.boundary_edges() {
                let d = w - region.site(i);
                let dir = DIRECTIONS.iter().position(|&e| e == d).expect("unit step");
                ghost[i][dir] = (edges.len() + ghost_edges.len()) as u32;
                ghost_edges.push(i as u32);
            }
        }
        let graph = Graph::new(n, edges, ghost_edges, region.origin_index()).expect("lattice graph is valid");
        LatticeGraph {
            region,
            wiring,
            graph,
            forward,
            ghost,
        }
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn wiring(&self) -> Wiring {
        self.wiring
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Bond joining `s` to `s + DIRECTIONS[dir]`, where the far end may be
    /// outside the box (then it is the ghost edge, absent under free wiring).
    pub fn bond(&self, s: Site, dir: usize) -> Option<usize> {
        let i = self.region.index(s)?;
        let t = s + DIRECTIONS[dir];
        let id = if self.region.contains(t) {
            if dir.is_multiple_of(2) {
                self.forward[i][dir / 2]
            } else {
                self.forward[self.region.index_unchecked(t)][dir / 2]
            }
        } else {
            self.ghost[i][dir]
        };
        (id != NO_BOND).then_some(id as usize)
    }
}

/// Small graphs for exhaustive checks: at most 10 sites and at most 26 sites
/// plus bonds, so the joint spin–bond space has at most `2^26` states.
pub mod fixtures {
    use super::*;
    use crate::rng::chain_rng;
    use rand::Rng;

    #[derive(Clone, Debug)]
    pub struct Fixture {
        pub name: String,
        pub graph: Graph,
    }

    fn fixture(name: &str, graph: Graph) -> Fixture {
        Fixture {
            name: name.to_string(),
            graph,
        }
    }

    /// `Λ_0` with its six ghost edges.
    pub fn single_site() -> Graph {
        LatticeGraph::new(Region::new(0).unwrap(), Wiring::Wired)
            .graph()
            .clone()
    }

    fn cube_edges() -> Vec<[u32; 2]> {
        let mut edges = Vec::new();
        for i in 0..8u32 {
            for bit in [4, 2, 1] {
                if i & bit == 0 {
                    edges.push([i, i | bit]);
                }
            }
        }
        edges
    }

    /// The 2×2×2 cube with free boundary.
    pub fn cube_free() -> Graph {
        Graph::new(8, cube_edges(), vec![], 0).unwrap()
    }

    /// The 2×2×2 cube whose origin corner carries three ghost edges.
    pub fn cube_corner_wired() -> Graph {
        Graph::new(8, cube_edges(), vec![0, 0, 0], 0).unwrap()
    }

    /// A 2×3 ladder with ghost edges at both ends of one rail.
    pub fn ladder() -> Graph {
        // sites (r, c) -> 3r + c
        let mut edges = Vec::new();
        for r in 0..2u32 {
            for c in 0..2u32 {
                edges.push([3 * r + c, 3 * r + c + 1]);
            }
        }
        for c in 0..3u32 {
            edges.push([c, 3 + c]);
        }
        Graph::new(6, edges, vec![0, 2], 1).unwrap()
    }

    /// A connected random graph on `n` sites with `extra` chords and `ghosts`
    /// ghost edges, all drawn from `seed`.
    pub fn random_sparse(n: usize, extra: usize, ghosts: usize, seed: u64) -> Graph {
        let mut rng = chain_rng(seed, 0);
        let mut edges: Vec<[u32; 2]> = (1..n as u32).map(|v| [rng.random_range(0..v), v]).collect();
        let mut attempts = 0;
        while edges.len() < n - 1 + extra && attempts < 1000 {
            attempts += 1;
            let u = rng.random_range(0..n as u32);
            let v = rng.random_range(0..n as u32);
            let e = [u.min(v), u.max(v)];
            if u != v && !edges.iter().any(|f| [f[0].min(f[1]), f[0].max(f[1])] == e) {
                edges.push(e);
            }
        }
        let ghost_edges = (0..ghosts).map(|_| rng.random_range(0..n as u32)).collect();
        Graph::new(n, edges, ghost_edges, 0).unwrap()
    }

    /// The standard exhaustive-check family (eight graphs).
    pub fn standard() -> Vec<Fixture> {
        let mut out = vec![
            fixture("lambda0", single_site()),
            fixture("cube-free", cube_free()),
            fixture("cube-corner", cube_corner_wired()),
            fixture("ladder", ladder()),
        ];
        let shapes = [(5, 2, 2), (6, 3, 3), (7, 2, 3), (8, 3, 2), (9, 2, 2)];
        for (k, &(n, extra, ghosts)) in shapes.iter().enumerate() {
            out.push(fixture(
                &format!("random-{k}"),
                random_sparse(n, extra, ghosts, 1000 + k as u64),
            ));
        }
        out
    }
}
