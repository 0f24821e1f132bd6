//! Python bindings. Rationals cross the boundary as `"num/den"` strings.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use gwhk_core::anneal::{self, ExperimentConfig, ZSchedule};
use gwhk_core::isolation;
use gwhk_core::ocean::{self, WeightedOceanGraph};
use gwhk_core::rational::{format_rational, parse_rational};
use gwhk_core::{spectral, verify, ReturnSeries, SeriesEntry, TreeSampleSpec};

create_exception!(gwhk, GwhkError, PyException);

fn err(e: gwhk_core::Error) -> PyErr {
    GwhkError::new_err(e.to_string())
}

#[pyclass(name = "OffspringDistribution", module = "gwhk", frozen)]
struct PyDistribution {
    inner: gwhk_core::OffspringDistribution,
    spec: String,
}

#[pymethods]
impl PyDistribution {
    /// Parses `"j:p,j:p,..."` with rational or decimal probabilities.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        let inner = gwhk_core::OffspringDistribution::parse(spec).map_err(err)?;
        Ok(Self { inner, spec: spec.to_owned() })
    }

    fn p(&self, j: u32) -> f64 {
        self.inner.p(j)
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    #[getter]
    fn is_supercritical(&self) -> bool {
        self.inner.is_supercritical()
    }

    fn survival_to_depth(&self, n: usize) -> f64 {
        self.inner.survival_to_depth(n)
    }

    fn expected_truncated_size(&self, t: u32) -> f64 {
        self.inner.expected_truncated_size(t)
    }

    fn __repr__(&self) -> String {
        format!("OffspringDistribution({:?})", self.spec)
    }
}

#[pyclass(name = "Tree", module = "gwhk", frozen)]
struct PyTree {
    inner: gwhk_core::RootedTree,
}

#[pymethods]
impl PyTree {
    /// `parents[0]` is `None`; `relaxed` allows frontier counts anywhere.
    #[staticmethod]
    #[pyo3(signature = (parents, frontier, relaxed = false))]
    fn from_parents(parents: Vec<Option<usize>>, frontier: Vec<u32>, relaxed: bool) -> PyResult<Self> {
        let inner = if relaxed {
            gwhk_core::RootedTree::from_parents_relaxed(&parents, &frontier)
        } else {
            gwhk_core::RootedTree::from_parents(&parents, &frontier)
        };
        Ok(Self { inner: inner.map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (text, relaxed = false))]
    fn parse(text: &str, relaxed: bool) -> PyResult<Self> {
        let inner = if relaxed {
            gwhk_core::RootedTree::parse_relaxed(text)
        } else {
            gwhk_core::RootedTree::parse(text)
        };
        Ok(Self { inner: inner.map_err(err)? })
    }

    #[staticmethod]
    fn regular(arity: u32, height: u32) -> Self {
        Self { inner: gwhk_core::RootedTree::regular(arity, height) }
    }

    #[staticmethod]
    #[pyo3(signature = (dist, depth_cap, seed, index = 0, survival = false))]
    fn sample(dist: &PyDistribution, depth_cap: u32, seed: u64, index: u64, survival: bool) -> PyResult<Self> {
        let spec = TreeSampleSpec {
            dist: dist.inner.clone(),
            depth_cap,
            survival_required: survival,
            master_seed: seed,
            sample_index: index,
        };
        Ok(Self { inner: gwhk_core::sample_tree(&spec).map_err(err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn parents(&self) -> Vec<Option<usize>> {
        self.inner.parents().to_vec()
    }

    #[getter]
    fn frontier(&self) -> Vec<u32> {
        self.inner.frontiers().to_vec()
    }

    #[getter]
    fn height(&self) -> u32 {
        self.inner.height()
    }

    fn degree(&self, v: usize) -> PyResult<u32> {
        self.check(v)?;
        Ok(self.inner.degree(v))
    }

    fn depth(&self, v: usize) -> PyResult<u32> {
        self.check(v)?;
        Ok(self.inner.depth(v))
    }

    fn truncate(&self, t: u32) -> PyResult<Self> {
        Ok(Self { inner: self.inner.truncate(t).map_err(err)? })
    }

    fn serialize(&self) -> String {
        self.inner.serialize()
    }

    fn __repr__(&self) -> String {
        format!("Tree(len={}, height={})", self.inner.len(), self.inner.height())
    }
}

impl PyTree {
    fn check(&self, v: usize) -> PyResult<()> {
        if v < self.inner.len() {
            Ok(())
        } else {
            Err(err(gwhk_core::Error::UnknownVertex(v)))
        }
    }
}

#[pyclass(name = "IslandDecomposition", module = "gwhk", frozen)]
struct PyDecomposition {
    inner: isolation::IslandDecomposition,
}

#[pymethods]
impl PyDecomposition {
    #[getter]
    fn q(&self) -> String {
        format_rational(&self.inner.q())
    }

    #[getter]
    fn islands(&self) -> Vec<Vec<usize>> {
        self.inner.islands().iter().map(|i| i.vertices.clone()).collect()
    }

    #[getter]
    fn deltas(&self) -> Vec<String> {
        self.inner.islands().iter().map(|i| format_rational(&i.delta)).collect()
    }

    #[getter]
    fn ocean(&self) -> Vec<usize> {
        self.inner.ocean_vertices()
    }

    fn __repr__(&self) -> String {
        format!("IslandDecomposition(q={}, islands={:?})", self.q(), self.islands())
    }
}

#[pyclass(name = "OceanGraph", module = "gwhk", frozen)]
struct PyOcean {
    inner: WeightedOceanGraph,
}

#[pymethods]
impl PyOcean {
    /// Tree ids of the ocean vertices, in index order.
    #[getter]
    fn vertices(&self) -> Vec<usize> {
        self.inner.vertices().to_vec()
    }

    /// Weight between two tree vertices; 0 when either is not in the ocean.
    fn weight(&self, x: usize, y: usize) -> f64 {
        self.inner.weight(x, y)
    }

    /// `(x, y, w)` over tree ids.
    fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.inner.triplets()
    }

    fn operator_norm(&self) -> f64 {
        spectral::operator_norm_dense(&self.inner)
    }

    /// `(ratio, minimizing set)` over connected sets of at most `max_size` vertices.
    #[pyo3(signature = (max_size = None))]
    fn isoperimetric(&self, max_size: Option<usize>) -> PyResult<(f64, Vec<usize>)> {
        let iso = spectral::isoperimetric_bruteforce(&self.inner, max_size.unwrap_or(self.inner.len())).map_err(err)?;
        Ok((iso.ratio, iso.set))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
fn delta_q(tree: &PyTree, vertices: Vec<usize>, q: &str) -> PyResult<String> {
    let q = parse_rational(q).map_err(err)?;
    Ok(format_rational(&isolation::delta_q(&tree.inner, &vertices, q).map_err(err)?))
}

#[pyfunction]
fn decompose_islands(tree: &PyTree, q: &str) -> PyResult<PyDecomposition> {
    let q = parse_rational(q).map_err(err)?;
    Ok(PyDecomposition { inner: isolation::decompose_islands(&tree.inner, q).map_err(err)? })
}

#[pyfunction]
fn ocean_weights(tree: &PyTree, decomposition: &PyDecomposition) -> PyResult<PyOcean> {
    Ok(PyOcean { inner: ocean::build_ocean_weights(&tree.inner, &decomposition.inner).map_err(err)? })
}

/// `P[X_s = start]` for `s = 0..=steps`.
#[pyfunction]
#[pyo3(signature = (tree, steps, start = 0))]
fn heat_kernel(tree: &PyTree, steps: u32, start: usize) -> PyResult<Vec<f64>> {
    Ok(spectral::heat_kernel(&tree.inner, start, steps).map_err(err)?.values)
}

type Row = (u32, f64, f64, u64);

fn rows(series: &ReturnSeries) -> Vec<Row> {
    series.entries.iter().map(|e| (e.s, e.value, e.stderr, e.n)).collect()
}

/// Annealed returns as `(s, value, stderr, n)` rows. `config` is the JSON
/// experiment config accepted by the command-line tool.
#[pyfunction]
#[pyo3(signature = (config = "{}", workers = 1))]
fn annealed_return(py: Python<'_>, config: &str, workers: usize) -> PyResult<Vec<Row>> {
    let cfg: ExperimentConfig = serde_json::from_str(config).map_err(|e| GwhkError::new_err(e.to_string()))?;
    let series = py.detach(|| anneal::annealed_return(&cfg, workers)).map_err(err)?;
    Ok(rows(&series))
}

#[pyfunction]
fn fit_decay<'py>(py: Python<'py>, series: Vec<Row>, t_lo: u32, t_hi: u32) -> PyResult<Bound<'py, PyDict>> {
    let series = ReturnSeries {
        entries: series.into_iter().map(|(s, value, stderr, n)| SeriesEntry { s, value, stderr, n }).collect(),
    };
    let fit = anneal::fit_decay(&series, t_lo, t_hi).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("beta_hat", fit.beta_hat)?;
    out.set_item("c_hat", fit.c_hat)?;
    out.set_item("r_squared", fit.r_squared)?;
    out.set_item("window", fit.window)?;
    out.set_item("points", fit.points)?;
    Ok(out)
}

/// `(z_t, q_t, bound_t)` for `z_t = 3 + c3·t^(1/k)`.
#[pyfunction]
fn schedule_values(t: u32, h: f64, c3: f64, k: f64) -> PyResult<(f64, f64, f64)> {
    let s = anneal::schedule_values(t, h, &ZSchedule::Power { c3, k }).map_err(err)?;
    Ok((s.z_t, s.q_t, s.bound))
}

/// Runs the property suite and returns `(name, passed, detail)` per check.
#[pyfunction]
#[pyo3(signature = (corpus = "small", seed = 1))]
fn run_verify(py: Python<'_>, corpus: &str, seed: u64) -> PyResult<Vec<(String, bool, String)>> {
    let corpus = match corpus {
        "small" => verify::Corpus::Small,
        "full" => verify::Corpus::Full,
        other => return Err(GwhkError::new_err(format!("unknown corpus {other:?}"))),
    };
    let report = py.detach(|| verify::run(corpus, seed));
    Ok(report
        .checks
        .into_iter()
        .map(|c| match c.result {
            Ok(d) => (c.name.to_owned(), true, d),
            Err(d) => (c.name.to_owned(), false, d),
        })
        .collect())
}

#[pymodule]
fn gwhk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GwhkError", m.py().get_type::<GwhkError>())?;
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyTree>()?;
    m.add_class::<PyDecomposition>()?;
    m.add_class::<PyOcean>()?;
    m.add_function(wrap_pyfunction!(delta_q, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_islands, m)?)?;
    m.add_function(wrap_pyfunction!(ocean_weights, m)?)?;
    m.add_function(wrap_pyfunction!(heat_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(annealed_return, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay, m)?)?;
    m.add_function(wrap_pyfunction!(schedule_values, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}
