//! Python bindings: `import rfim`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rfim_core::coarsegrain::{decompose, extract_outmost_blue_boundary, CoarseColoring};
use rfim_core::disorder;
use rfim_core::exactgibbs::{self, BoundaryCondition, Temperature};
use rfim_core::fkising::exact::fk_log_partition;
use rfim_core::graph::{self, fixtures, LatticeGraph, Wiring};
use rfim_core::lab::{self, influence, ExperimentConfig, LabError};
use rfim_core::lattice::{self, CoarseGrid, Site, SiteSet};
use rfim_core::metricpartition::{ckr_partition, partition_boundary_set, LinfSites};
use rfim_core::rng::chain_rng;

type Triple = (i32, i32, i32);

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn lab_err(e: LabError) -> PyErr {
    match e {
        LabError::Config { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn temperature(t: f64) -> PyResult<Temperature> {
    Temperature::new(t).map_err(value_err)
}

fn site(t: Triple) -> Site {
    Site::new(t.0, t.1, t.2)
}

fn triple(s: Site) -> Triple {
    (s.x, s.y, s.z)
}

fn triples(set: &SiteSet) -> Vec<Triple> {
    set.iter().map(triple).collect()
}

fn boundary_condition(plus: bool) -> BoundaryCondition {
    if plus {
        BoundaryCondition::Plus
    } else {
        BoundaryCondition::Minus
    }
}

/// The box `Λ_N = [-N, N]^3`.
#[pyclass(name = "Region", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyRegion(lattice::Region);

#[pymethods]
impl PyRegion {
    #[new]
    fn new(half_side: i64) -> PyResult<Self> {
        lattice::Region::new(half_side).map(PyRegion).map_err(value_err)
    }

    #[getter]
    fn half_side(&self) -> i32 {
        self.0.half_side()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __contains__(&self, s: Triple) -> bool {
        self.0.contains(site(s))
    }

    fn index(&self, s: Triple) -> Option<usize> {
        self.0.index(site(s))
    }

    fn site(&self, index: usize) -> PyResult<Triple> {
        if index >= self.0.len() {
            return Err(value_err(format!("index {index} out of range")));
        }
        Ok(triple(self.0.site(index)))
    }

    fn __repr__(&self) -> String {
        format!("Region({})", self.0.half_side())
    }
}

/// A seeded Gaussian field on a region.
#[pyclass(name = "DisorderField", frozen)]
struct PyDisorder(disorder::DisorderField);

#[pymethods]
impl PyDisorder {
    #[new]
    fn new(half_side: i64, seed: u64) -> PyResult<Self> {
        let r = lattice::Region::new(half_side).map_err(value_err)?;
        Ok(PyDisorder(disorder::DisorderField::sample(r, seed)))
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed()
    }

    #[getter]
    fn region(&self) -> PyRegion {
        PyRegion(self.0.region())
    }

    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn negated(&self) -> Self {
        PyDisorder(self.0.negated())
    }

    fn field_sum(&self, sites: Vec<Triple>) -> PyResult<f64> {
        let set = SiteSet::from_sites(self.0.region(), sites.into_iter().map(site)).map_err(value_err)?;
        self.0.field_sum(&set).map_err(value_err)
    }

    fn to_bytes(&self) -> PyResult<Vec<u8>> {
        let mut buf = Vec::new();
        self.0.write_to(&mut buf).map_err(value_err)?;
        Ok(buf)
    }

    #[staticmethod]
    fn from_bytes(data: Vec<u8>) -> PyResult<Self> {
        disorder::DisorderField::read_from(&data[..])
            .map(PyDisorder)
            .map_err(value_err)
    }
}

/// An interaction graph with a plus-wired ghost vertex.
#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    name: String,
    inner: graph::Graph,
}

#[pymethods]
impl PyGraph {
    /// The lattice box `Λ_N`, wired to the ghost or free.
    #[staticmethod]
    #[pyo3(signature = (half_side, wired = true))]
    fn lattice(half_side: i64, wired: bool) -> PyResult<Self> {
        let r = lattice::Region::new(half_side).map_err(value_err)?;
        let w = if wired { Wiring::Wired } else { Wiring::Free };
        Ok(PyGraph {
            name: format!("lattice-{half_side}"),
            inner: LatticeGraph::new(r, w).graph().clone(),
        })
    }

    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        fixtures::standard()
            .into_iter()
            .find(|f| f.name == name)
            .map(|f| PyGraph {
                name: f.name,
                inner: f.graph,
            })
            .ok_or_else(|| value_err(format!("unknown fixture `{name}`")))
    }

    #[staticmethod]
    fn fixture_names() -> Vec<String> {
        fixtures::standard().into_iter().map(|f| f.name).collect()
    }

    #[getter]
    fn name(&self) -> &str {
        &self.name
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.inner.n_sites()
    }

    #[getter]
    fn n_bonds(&self) -> usize {
        self.inner.n_bonds()
    }

    #[getter]
    fn origin(&self) -> usize {
        self.inner.origin()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph({}, sites={}, bonds={})",
            self.name,
            self.inner.n_sites(),
            self.inner.n_bonds()
        )
    }
}

impl PyGraph {
    fn field(&self, h: Option<Vec<f64>>, seed: u64) -> PyResult<Vec<f64>> {
        let h = h.unwrap_or_else(|| disorder::gaussian_values(self.inner.n_sites(), seed));
        if h.len() != self.inner.n_sites() {
            return Err(value_err(format!(
                "field has {} values, graph has {} sites",
                h.len(),
                self.inner.n_sites()
            )));
        }
        Ok(h)
    }
}

/// Exact boundary influence `m = μ⁺(σ_o=+1) − μ⁻(σ_o=+1)` by enumeration.
/// Without `h` a Gaussian field is drawn from `seed`.
#[pyfunction]
#[pyo3(signature = (graph, eps, t, h = None, seed = 0))]
fn exact_influence(graph: &PyGraph, eps: f64, t: f64, h: Option<Vec<f64>>, seed: u64) -> PyResult<f64> {
    let h = graph.field(h, seed)?;
    exactgibbs::exact_boundary_influence(&graph.inner, &h, eps, temperature(t)?).map_err(value_err)
}

/// Exact `P(σ_site = +1)` under the plus or minus boundary.
#[pyfunction]
#[pyo3(signature = (graph, eps, t, site, plus = true, h = None, seed = 0))]
fn exact_marginal(
    graph: &PyGraph,
    eps: f64,
    t: f64,
    site: usize,
    plus: bool,
    h: Option<Vec<f64>>,
    seed: u64,
) -> PyResult<f64> {
    let h = graph.field(h, seed)?;
    exactgibbs::exact_spin_marginal(&graph.inner, boundary_condition(plus), &h, eps, temperature(t)?, site)
        .map_err(value_err)
}

/// The Gibbs law over spin masks (bit `v` set means `σ_v = +1`).
#[pyfunction]
#[pyo3(signature = (graph, eps, t, plus = true, h = None, seed = 0))]
fn gibbs_distribution(
    graph: &PyGraph,
    eps: f64,
    t: f64,
    plus: bool,
    h: Option<Vec<f64>>,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let h = graph.field(h, seed)?;
    exactgibbs::gibbs_distribution(&graph.inner, boundary_condition(plus), &h, eps, temperature(t)?).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (graph, eps, t, h = None, seed = 0))]
fn fk_log_z(graph: &PyGraph, eps: f64, t: f64, h: Option<Vec<f64>>, seed: u64) -> PyResult<f64> {
    let h = graph.field(h, seed)?;
    fk_log_partition(&graph.inner, &h, eps, temperature(t)?).map_err(value_err)
}

/// Swendsen–Wang estimate of `m`, returned as `(mean, stderr)`.
#[pyfunction]
#[pyo3(signature = (graph, eps, t, sweeps, burn_in = 100, chains = 1, seed = 0, h = None, estimator = "rb"))]
#[allow(clippy::too_many_arguments)]
fn estimate_influence(
    py: Python<'_>,
    graph: &PyGraph,
    eps: f64,
    t: f64,
    sweeps: usize,
    burn_in: usize,
    chains: usize,
    seed: u64,
    h: Option<Vec<f64>>,
    estimator: &str,
) -> PyResult<(f64, f64)> {
    let est = match estimator {
        "rb" => lab::Estimator::RaoBlackwell,
        "raw" => lab::Estimator::Raw,
        other => return Err(value_err(format!("estimator must be `rb` or `raw`, got `{other}`"))),
    };
    if sweeps < 2 || chains == 0 {
        return Err(value_err("need sweeps >= 2 and chains >= 1"));
    }
    let h = graph.field(h, seed)?;
    let t = temperature(t)?;
    let g = &graph.inner;
    let e = py.detach(|| influence::estimate_influence(g, &h, eps, t, est, burn_in, sweeps, chains, seed));
    Ok((e.mean, e.stderr))
}

/// The outmost blue boundary of a coarse coloring and its decomposition.
#[pyclass(name = "Decomposition", frozen)]
struct PyDecomposition {
    grid: CoarseGrid,
    inner: rfim_core::coarsegrain::Decomposition,
}

#[pymethods]
impl PyDecomposition {
    #[getter]
    fn k(&self) -> i32 {
        self.inner.k
    }

    #[getter]
    fn b(&self) -> Vec<Triple> {
        triples(&self.inner.b)
    }

    #[getter]
    fn b_prime(&self) -> Vec<Triple> {
        triples(&self.inner.b_prime)
    }

    #[getter]
    fn s1(&self) -> Vec<Triple> {
        triples(&self.inner.s1)
    }

    #[getter]
    fn s2(&self) -> Vec<Triple> {
        triples(&self.inner.s2)
    }

    #[getter]
    fn holes(&self) -> Vec<Vec<Triple>> {
        self.inner.holes.iter().map(triples).collect()
    }

    /// `|B ∪ B'|`.
    fn length(&self) -> usize {
        self.inner.x().len()
    }

    fn record(&self) -> String {
        self.inner.to_record(&self.grid)
    }

    fn __repr__(&self) -> String {
        format!(
            "Decomposition(k={}, |B|={}, |B'|={}, holes={})",
            self.inner.k,
            self.inner.b.len(),
            self.inner.b_prime.len(),
            self.inner.holes.len()
        )
    }
}

/// Extracts `(B, B')` from the coloring of `Λ_{N̂}` whose red sites are
/// `red` and decomposes it at scale `k`. Returns `None` when the origin has
/// no enclosing blue boundary.
#[pyfunction]
#[pyo3(signature = (n_hat, red, k = 1, q = 1))]
fn extract_boundary(n_hat: i32, red: Vec<Triple>, k: i32, q: i32) -> PyResult<Option<PyDecomposition>> {
    let grid = CoarseGrid::with_coarse_half_side(n_hat, q).map_err(value_err)?;
    let red = SiteSet::from_sites(grid.coarse(), red.into_iter().map(site)).map_err(value_err)?;
    let coloring = CoarseColoring::from_red(grid, &red);
    let bb = extract_outmost_blue_boundary(&coloring, k).map_err(value_err)?;
    if bb.is_empty() {
        return Ok(None);
    }
    let d = decompose(&bb, k).map_err(value_err)?;
    Ok(Some(PyDecomposition { grid, inner: d }))
}

/// One CKR partition of `points` under the `ℓ∞` metric at scale `R`;
/// returns the block index of every point.
#[pyfunction]
#[pyo3(signature = (points, scale, seed = 0))]
fn partition(points: Vec<Triple>, scale: f64, seed: u64) -> PyResult<Vec<usize>> {
    let space = LinfSites::new(points.into_iter().map(site).collect());
    ckr_partition(&space, scale, &mut chain_rng(seed, 0))
        .map(|p| p.block_of)
        .map_err(value_err)
}

/// Fraction of `points` not padded by a partition at scale `R = q^4`.
#[pyfunction]
#[pyo3(signature = (points, q, seed = 0))]
fn boundary_fraction(points: Vec<Triple>, q: i32, seed: u64) -> PyResult<f64> {
    let pts: Vec<Site> = points.into_iter().map(site).collect();
    partition_boundary_set(&pts, q, &mut chain_rng(seed, 0))
        .map(|p| p.boundary_fraction())
        .map_err(value_err)
}

/// Experiment configuration with the `rfim-lab` keys.
#[pyclass(name = "Config", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig(ExperimentConfig);

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut cfg = ExperimentConfig::default();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                cfg.set(&k.extract::<String>()?, &v.str()?.to_string())
                    .map_err(lab_err)?;
            }
        }
        Ok(PyConfig(cfg))
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        ExperimentConfig::from_text(text).map(PyConfig).map_err(lab_err)
    }

    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        self.0.set(key, value).map_err(lab_err)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn __repr__(&self) -> String {
        format!("Config({})", self.0.to_text().trim().replace('\n', "; "))
    }
}

/// Influence sweep over the config grid: one dict per `(T, eps, N, replica)`.
#[pyfunction]
fn simulate<'py>(py: Python<'py>, config: &PyConfig) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = config.0.clone();
    let records = py.detach(|| lab::run_influence_sweep(&cfg, false)).map_err(lab_err)?;
    records
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("T", r.t)?;
            d.set_item("eps", r.eps)?;
            d.set_item("N", r.n)?;
            d.set_item("replica", r.replica)?;
            d.set_item("m_hat", r.m_hat)?;
            d.set_item("stderr", r.stderr)?;
            d.set_item("sweeps", r.sweeps)?;
            Ok(d)
        })
        .collect()
}

/// Coarse-grained decay of `L = |B ∪ B'|`: bins and the tail fit.
#[pyfunction]
fn decay<'py>(py: Python<'py>, config: &PyConfig) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config.0.clone();
    let rec = py.detach(|| lab::run_decay_experiment(&cfg)).map_err(lab_err)?;
    let d = PyDict::new(py);
    d.set_item("samples", rec.samples)?;
    d.set_item(
        "bins",
        rec.bins.iter().map(|b| (b.l, b.count, b.prob)).collect::<Vec<_>>(),
    )?;
    d.set_item("slope", rec.fit.as_ref().map(|f| f.slope))?;
    d.set_item("slope_ci", rec.fit.as_ref().map(|f| f.slope_ci))?;
    d.set_item("violations", rec.violations)?;
    Ok(d)
}

type GoodBoxTuple = (f64, i32, String, f64, f64);

/// Good-box probabilities: `(T, q, bc, prob, stderr)` rows.
#[pyfunction]
fn goodbox(py: Python<'_>, config: &PyConfig) -> PyResult<Vec<GoodBoxTuple>> {
    let cfg = config.0.clone();
    let rep = py.detach(|| lab::run_goodbox_calibration(&cfg)).map_err(lab_err)?;
    Ok(rep
        .rows
        .into_iter()
        .map(|r| (r.t, r.q, r.bc, r.prob, r.stderr))
        .collect())
}

#[pymodule]
fn rfim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRegion>()?;
    m.add_class::<PyDisorder>()?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyDecomposition>()?;
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(exact_influence, m)?)?;
    m.add_function(wrap_pyfunction!(exact_marginal, m)?)?;
    m.add_function(wrap_pyfunction!(gibbs_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(fk_log_z, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_influence, m)?)?;
    m.add_function(wrap_pyfunction!(extract_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(partition, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(decay, m)?)?;
    m.add_function(wrap_pyfunction!(goodbox, m)?)?;
    Ok(())
}
