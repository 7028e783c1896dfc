//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use rand::Rng;
use rfim_core::coarsegrain::{decompose, extract_outmost_blue_boundary, CoarseColoring};
use rfim_core::graph::Graph;
use rfim_core::lattice::{Region, Site, SiteSet};

/// `ψ(A)` by definition: `v` is enclosed when every nearest-neighbour walk
/// from `v` to a site outside the region meets `A`.
pub fn enclosure_brute(a: &SiteSet) -> SiteSet {
    let region = a.region();
    let mut out = SiteSet::empty(region);
    for start in region.sites() {
        if a.contains(start) || !escapes(region, a, start) {
            out.insert(start).unwrap();
        }
    }
    out
}

fn escapes(region: Region, a: &SiteSet, start: Site) -> bool {
    let mut seen = SiteSet::empty(region);
    seen.insert(start).unwrap();
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        for w in s.neighbors() {
            if !region.contains(w) {
                return true;
            }
            if !a.contains(w) && seen.insert(w).unwrap() {
                queue.push_back(w);
            }
        }
    }
    false
}

/// Nearest-neighbour connectivity by flood fill.
pub fn is_connected(set: &SiteSet) -> bool {
    let Some(start) = set.iter().next() else { return true };
    let mut seen = SiteSet::empty(set.region());
    seen.insert(start).unwrap();
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        for w in s.neighbors() {
            if set.contains(w) && seen.insert(w).unwrap() {
                queue.push_back(w);
            }
        }
    }
    seen.len() == set.len()
}

/// `∂_i D` relative to `Z^3`, by scanning neighbours.
pub fn inner_boundary(d: &SiteSet) -> SiteSet {
    let mut out = SiteSet::empty(d.region());
    for s in d.iter() {
        if s.neighbors().iter().any(|&w| !d.contains(w)) {
            out.insert(s).unwrap();
        }
    }
    out
}

/// The origin's domain by peeling: repeatedly drop red sites of `∂_i D`
/// and keep the origin's component, starting from the whole grid. Empty
/// when the origin is peeled.
pub fn peel_domain(coloring: &CoarseColoring) -> SiteSet {
    let region = coloring.region();
    let red = coloring.red();
    let mut d = SiteSet::full(region);
    loop {
        let boundary_red: Vec<Site> = inner_boundary(&d).iter().filter(|&s| red.contains(s)).collect();
        if boundary_red.is_empty() {
            return d;
        }
        for s in boundary_red {
            if s == Site::ORIGIN {
                return SiteSet::empty(region);
            }
            d.remove_index(region.index(s).unwrap());
        }
        d = component_of_origin(&d);
        if d.is_empty() {
            return d;
        }
    }
}

pub fn component_of_origin(d: &SiteSet) -> SiteSet {
    let region = d.region();
    let mut out = SiteSet::empty(region);
    if !d.contains(Site::ORIGIN) {
        return out;
    }
    out.insert(Site::ORIGIN).unwrap();
    let mut queue = VecDeque::from([Site::ORIGIN]);
    while let Some(s) = queue.pop_front() {
        for w in s.neighbors() {
            if d.contains(w) && out.insert(w).unwrap() {
                queue.push_back(w);
            }
        }
    }
    out
}

/// Blue sites reachable from `b` by blue steps of `ℓ∞` length `≤ 2k`,
/// computed by repeated full scans.
pub fn blue_closure_scan(blue: &SiteSet, b: &SiteSet, k: i32) -> SiteSet {
    let mut out = b.clone();
    loop {
        let mut grew = false;
        for s in blue.iter() {
            if !out.contains(s) && out.iter().any(|t| t.linf(s) <= 2 * k) {
                out.insert(s).unwrap();
                grew = true;
            }
        }
        if !grew {
            return out;
        }
    }
}

/// On the `N̂ = 1` grid every site but the origin is on the grid boundary,
/// so a valid domain lies in `Blue ∪ {o}`. Returns the largest valid domain
/// (`D ∋ o` connected, `∂_i D` blue, `ψ(∂_i D) = D`) by enumerating those
/// subsets as 27-bit masks, or `None` when there is none. Panics if the
/// valid domains have no greatest element.
pub fn brute_force_domain_n1(coloring: &CoarseColoring) -> Option<SiteSet> {
    let region = coloring.region();
    assert_eq!(region.half_side(), 1);
    let nbr: Vec<u32> = region
        .sites()
        .map(|s| {
            s.neighbors()
                .iter()
                .filter_map(|&w| region.index(w))
                .fold(0, |m, j| m | 1 << j)
        })
        .collect();
    let on_edge: u32 = region
        .sites()
        .enumerate()
        .filter(|(_, s)| s.norm_inf() == 1)
        .fold(0, |m, (i, _)| m | 1 << i);
    let o = region.origin_index();
    let blue: u32 = coloring.blue().indices().fold(0, |m, i| m | 1 << i);
    let pool: Vec<usize> = (0..27).filter(|&i| i != o && blue >> i & 1 == 1).collect();
    assert!(pool.len() <= 20, "too many blue sites for enumeration");
    let grow = |seed: u32, within: u32| {
        let mut cur = seed;
        loop {
            let next = (0..27)
                .filter(|&i| cur >> i & 1 == 1)
                .fold(cur, |m, i| m | (nbr[i] & within));
            if next == cur {
                return cur;
            }
            cur = next;
        }
    };
    let mut valid: Vec<u32> = Vec::new();
    for sub in 0u32..1 << pool.len() {
        let d = pool
            .iter()
            .enumerate()
            .filter(|(b, _)| sub >> b & 1 == 1)
            .fold(1 << o, |m, (_, &i)| m | 1 << i);
        if grow(1 << o, d) != d {
            continue;
        }
        let interior = (0..27)
            .filter(|&i| d >> i & 1 == 1 && on_edge >> i & 1 == 0 && nbr[i] & !d == 0)
            .fold(0u32, |m, i| m | 1 << i);
        let b = d & !interior;
        if b & !blue != 0 {
            continue;
        }
        let outside = grow(on_edge & !b, !b & ((1 << 27) - 1));
        if !outside & ((1 << 27) - 1) == d {
            valid.push(d);
        }
    }
    let best = *valid.iter().max_by_key(|d| d.count_ones())?;
    assert!(
        valid.iter().all(|d| d & !best == 0),
        "valid domains have no greatest element"
    );
    Some(SiteSet::from_mask(
        region,
        (0..27).map(|i| best >> i & 1 == 1).collect(),
    ))
}

/// Checks an extraction and its decomposition against brute-force
/// definitions and the peeling oracle.
pub fn check_extraction(c: &CoarseColoring, k: i32) -> Result<(), String> {
    let bb = extract_outmost_blue_boundary(c, k).map_err(|e| e.to_string())?;
    let d_o = peel_domain(c);
    let ensure = |ok: bool, what: &str| if ok { Ok(()) } else { Err(what.to_string()) };
    if d_o.is_empty() {
        return ensure(
            bb.b.is_empty() && bb.b_prime.is_empty(),
            "nonempty B for a peeled origin",
        );
    }
    ensure(
        bb.b == inner_boundary(&d_o),
        "B differs from the peeled domain's boundary",
    )?;
    ensure(enclosure_brute(&bb.b) == d_o, "enclosure of B differs from the domain")?;
    ensure(
        bb.b_prime == blue_closure_scan(&c.blue(), &bb.b, k).difference(&bb.b),
        "B' differs from the blue closure",
    )?;

    let d = decompose(&bb, k).map_err(|e| e.to_string())?;
    let x = bb.union();
    let blue = c.blue();
    for s in x.region().sites() {
        let dist = x.iter().map(|t| t.linf(s)).min().unwrap();
        ensure(d.s1.contains(s) == (1..=k).contains(&dist), "S1 membership")?;
        ensure(d.s2.contains(s) == (dist > k && dist <= 2 * k), "S2 membership")?;
        ensure(
            !(dist <= 2 * k && blue.contains(s)) || x.contains(s),
            "blue site within 2k of X outside X",
        )?;
    }
    let l = x.len();
    ensure(d.s1.len() <= (((2 * k + 1).pow(3) - 1) as usize) * l, "|S1| bound")?;
    if k >= 4 {
        ensure(d.s2.len() <= 80 * (k as usize).pow(3) * l, "|S2| bound")?;
    }
    ensure(d.n_holes() <= d.s2.len(), "n <= |S2|")?;
    for u in &d.holes {
        ensure(!u.touches_region_boundary() && is_connected(u), "hole shape")?;
        ensure(!u.intersection(&d.s2).is_empty(), "hole without S2 point")?;
        ensure(enclosure_brute(u) == *u, "hole not simply connected")?;
    }
    ensure(
        d.checks(c).iter().all(|ch| ch.passed || !ch.applicable),
        "library invariant checks",
    )
}

/// A ballistic walk of `points` coarse sites: `x` advances by `0..=x_step`
/// while `y, z` jitter by at most one, so consecutive points are within
/// `ℓ∞` distance `x_step`.
pub fn ballistic_walk<R: Rng>(points: usize, x_step: i32, rng: &mut R) -> Vec<Site> {
    let mut s = Site::ORIGIN;
    let mut out = Vec::with_capacity(points);
    for _ in 0..points {
        out.push(s);
        s = s + Site::new(
            rng.random_range(0..=x_step),
            rng.random_range(-1..=1),
            rng.random_range(-1..=1),
        );
    }
    out.sort_by_key(|s| (s.x, s.y, s.z));
    out.dedup();
    out
}

/// The 48 signed axis permutations.
pub fn cube_symmetries() -> Vec<Box<dyn Fn(Site) -> Site>> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out: Vec<Box<dyn Fn(Site) -> Site>> = Vec::new();
    for p in perms {
        for signs in 0..8 {
            out.push(Box::new(move |s: Site| {
                let c = s.coords();
                let f = |axis: usize| {
                    if signs >> axis & 1 == 1 {
                        -c[p[axis]]
                    } else {
                        c[p[axis]]
                    }
                };
                Site::new(f(0), f(1), f(2))
            }));
        }
    }
    out
}

fn lse(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn normalise(logw: &[f64]) -> Vec<f64> {
    let z = lse(logw);
    logw.iter().map(|lw| (lw - z).exp()).collect()
}

/// Ising log weights `−H/T` over spin masks (bit `v` set means `σ_v = +1`),
/// the ghost spin equal to `boundary`.
pub fn ising_log_weights(g: &Graph, boundary: i8, h: &[f64], eps: f64, t: f64) -> Vec<f64> {
    let n = g.n_sites();
    (0..1u64 << n)
        .map(|mask| {
            let spin = |v: usize| {
                if v == g.ghost() {
                    boundary as f64
                } else if mask >> v & 1 == 1 {
                    1.0
                } else {
                    -1.0
                }
            };
            let mut e = 0.0;
            for b in 0..g.n_bonds() {
                let (u, v) = g.bond_endpoints(b);
                e -= spin(u) * spin(v);
            }
            for (v, hv) in h.iter().enumerate().take(n) {
                e -= eps * hv * spin(v);
            }
            -e / t
        })
        .collect()
}

pub fn ising_law(g: &Graph, boundary: i8, h: &[f64], eps: f64, t: f64) -> Vec<f64> {
    normalise(&ising_log_weights(g, boundary, h, eps, t))
}

/// Clusters of the open bonds in `omega` as a label per vertex, the ghost
/// being vertex `n_sites`. Plain depth-first search.
pub fn clusters(g: &Graph, omega: u64) -> Vec<usize> {
    let nv = g.n_sites() + 1;
    let mut adj = vec![Vec::new(); nv];
    for b in 0..g.n_bonds() {
        if omega >> b & 1 == 1 {
            let (u, v) = g.bond_endpoints(b);
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    let mut label = vec![usize::MAX; nv];
    let mut next = 0;
    for s in 0..nv {
        if label[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        label[s] = next;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if label[w] == usize::MAX {
                    label[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    label
}

/// Plus-wired FK log weight: `p^|ω| (1−p)^{|E|−|ω|}` times `2cosh(εh_C/T)`
/// per free cluster and `exp(εh_{C*}/T)` for the ghost cluster.
pub fn fk_log_weight_oracle(g: &Graph, omega: u64, h: &[f64], eps: f64, t: f64) -> f64 {
    let p: f64 = 1.0 - (-2.0 / t).exp();
    let open = omega.count_ones() as f64;
    let mut lw = open * p.ln() + (g.n_bonds() as f64 - open) * (1.0 - p).ln();
    let label = clusters(g, omega);
    let n_clusters = label.iter().max().unwrap() + 1;
    let mut sums = vec![0.0; n_clusters];
    for v in 0..g.n_sites() {
        sums[label[v]] += h[v];
    }
    let ghost = label[g.ghost()];
    for (c, &s) in sums.iter().enumerate() {
        let x = eps * s / t;
        lw += if c == ghost { x } else { (2.0 * x.cosh()).ln() };
    }
    lw
}

pub fn fk_law(g: &Graph, h: &[f64], eps: f64, t: f64) -> Vec<f64> {
    let logw: Vec<f64> = (0..1u64 << g.n_bonds())
        .map(|w| fk_log_weight_oracle(g, w, h, eps, t))
        .collect();
    normalise(&logw)
}

/// `μ⁺(σ_o = −1)` through the FK side: a free origin cluster `C` is minus
/// with probability `e^{−x}/(2cosh x)`, `x = εh_C/T`.
pub fn fk_origin_minus(g: &Graph, h: &[f64], eps: f64, t: f64) -> f64 {
    let law = fk_law(g, h, eps, t);
    law.iter()
        .enumerate()
        .map(|(w, &pw)| {
            let label = clusters(g, w as u64);
            let c = label[g.origin()];
            if c == label[g.ghost()] {
                return 0.0;
            }
            let x: f64 = eps * (0..g.n_sites()).filter(|&v| label[v] == c).map(|v| h[v]).sum::<f64>() / t;
            pw * (-x).exp() / (2.0 * x.cosh())
        })
        .sum()
}

pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
