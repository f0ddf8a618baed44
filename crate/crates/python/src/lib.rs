//! Python bindings: weights, trees, seeded streams, cutting, shuffling and
//! the continuum helpers. Records cross the boundary as plain dicts.

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

use cuttree::cutting::{cut_complete, cut_k, cut_one, CutRecordJson};
use cuttree::icrt::{self, ThetaParam};
use cuttree::rng::{self, SimRng};
use cuttree::{ptree, shuffle, verify, Error, ProbWeights, RootedTree};

fn err(e: Error) -> PyErr {
    match e {
        Error::UnknownSuite(_) => PyKeyError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn from_py<T: serde::de::DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let s: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&s).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn parse_theta(v: Vec<f64>) -> PyResult<ThetaParam> {
    ThetaParam::normalized(&v).map(|(t, _)| t).map_err(err)
}

/// Probability weights on vertices 1..=n.
#[pyclass(name = "Weights", module = "pycuttree", skip_from_py_object)]
#[derive(Clone)]
struct PyWeights(ProbWeights);

#[pymethods]
impl PyWeights {
    #[new]
    fn new(probs: Vec<f64>) -> PyResult<Self> {
        ProbWeights::new(probs).map(PyWeights).map_err(err)
    }

    #[staticmethod]
    fn uniform(n: usize) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("n must be positive"));
        }
        Ok(PyWeights(ProbWeights::uniform(n)))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.0.as_slice().to_vec()
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma()
    }

    fn p(&self, u: usize) -> PyResult<f64> {
        if u == 0 || u > self.0.n() {
            return Err(err(Error::VertexOutOfRange { vertex: u, n: self.0.n() }));
        }
        Ok(self.0.p(u))
    }

    fn sample(&self, rng: &mut PyRng) -> usize {
        self.0.sample(&mut rng.0)
    }

    fn __len__(&self) -> usize {
        self.0.n()
    }

    fn __repr__(&self) -> String {
        format!("Weights(n={})", self.0.n())
    }
}

/// Rooted tree on 1..=n.
#[pyclass(name = "Tree", module = "pycuttree", eq, frozen, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Hash)]
struct PyTree(RootedTree);

#[pymethods]
impl PyTree {
    /// `parents[i]` is the parent of vertex `i + 1`; the root has parent 0.
    #[new]
    fn new(parents: Vec<usize>) -> PyResult<Self> {
        let roots: Vec<usize> = (1..=parents.len()).filter(|&v| parents[v - 1] == 0).collect();
        if roots.len() != 1 {
            return Err(PyValueError::new_err(format!("expected one root, found {}", roots.len())));
        }
        let mut full = vec![0];
        full.extend(parents);
        RootedTree::new(roots[0], full).map(PyTree).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(PyTree).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("serializable")
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn root(&self) -> usize {
        self.0.root()
    }

    #[getter]
    fn parents(&self) -> Vec<usize> {
        self.0.parents()[1..].to_vec()
    }

    fn parent(&self, v: usize) -> PyResult<Option<usize>> {
        self.0.check_vertex(v).map_err(err)?;
        Ok(self.0.parent(v))
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().collect()
    }

    fn depth(&self, v: usize) -> PyResult<usize> {
        self.0.check_vertex(v).map_err(err)?;
        Ok(self.0.depth(v))
    }

    fn distance(&self, a: usize, b: usize) -> PyResult<usize> {
        self.0.check_vertex(a).map_err(err)?;
        self.0.check_vertex(b).map_err(err)?;
        Ok(self.0.distance(a, b))
    }

    fn reroot(&self, v: usize) -> PyResult<Self> {
        self.0.check_vertex(v).map_err(err)?;
        Ok(PyTree(self.0.reroot(v)))
    }

    fn __len__(&self) -> usize {
        self.0.n()
    }

    fn __repr__(&self) -> String {
        format!("Tree(n={}, root={})", self.0.n(), self.0.root())
    }
}

/// Seeded random stream.
#[pyclass(name = "Rng", module = "pycuttree")]
struct PyRng(SimRng);

#[pymethods]
impl PyRng {
    #[new]
    #[pyo3(signature = (seed, stream = None))]
    fn new(seed: u64, stream: Option<u64>) -> Self {
        PyRng(match stream {
            Some(i) => rng::replica(seed, i),
            None => rng::master(seed),
        })
    }
}

#[pyfunction]
fn sample_ptree(weights: &PyWeights, rng: &mut PyRng) -> PyResult<PyTree> {
    ptree::sample_ptree(&weights.0, &mut rng.0).map(PyTree).map_err(err)
}

#[pyfunction]
fn ptree_pmf(weights: &PyWeights, tree: &PyTree) -> PyResult<f64> {
    ptree::ptree_pmf(&weights.0, &tree.0).map_err(err)
}

/// Isolates `v`; returns the cut record as a dict.
#[pyfunction]
fn cut_one_vertex<'py>(
    py: Python<'py>,
    tree: &PyTree,
    v: usize,
    weights: &PyWeights,
    rng: &mut PyRng,
) -> PyResult<Bound<'py, PyAny>> {
    let rec = cut_one(&tree.0, v, &weights.0, &mut rng.0).map_err(err)?;
    to_py(py, &CutRecordJson::from(&rec))
}

#[pyfunction]
fn cut_targets<'py>(
    py: Python<'py>,
    tree: &PyTree,
    targets: Vec<usize>,
    weights: &PyWeights,
    rng: &mut PyRng,
) -> PyResult<Bound<'py, PyAny>> {
    let rec = cut_k(&tree.0, &targets, &weights.0, &mut rng.0).map_err(err)?;
    to_py(py, &CutRecordJson::from(&rec))
}

#[pyfunction]
fn cut_all<'py>(py: Python<'py>, tree: &PyTree, weights: &PyWeights, rng: &mut PyRng) -> PyResult<Bound<'py, PyAny>> {
    let rec = cut_complete(&tree.0, &weights.0, &mut rng.0).map_err(err)?;
    to_py(py, &CutRecordJson::from(&rec))
}

/// Tree of a cut record dict.
#[pyfunction]
fn record_tree(record: &Bound<'_, PyAny>) -> PyResult<PyTree> {
    let rec: CutRecordJson = from_py(record)?;
    Ok(PyTree(rec.cut_tree))
}

/// Undoes a recorded cut exactly.
#[pyfunction]
fn reverse(record: &Bound<'_, PyAny>) -> PyResult<PyTree> {
    let rec: CutRecordJson = from_py(record)?;
    shuffle::reverse_record(&rec).map(PyTree).map_err(err)
}

#[pyfunction]
fn shuff_one(tree: &PyTree, v: usize, weights: &PyWeights, rng: &mut PyRng) -> PyResult<PyTree> {
    shuffle::shuff_one(&tree.0, v, &weights.0, &mut rng.0).map(PyTree).map_err(err)
}

#[pyfunction]
fn shuff_k(tree: &PyTree, targets: Vec<usize>, weights: &PyWeights, rng: &mut PyRng) -> PyResult<PyTree> {
    shuffle::shuff_k(&tree.0, &targets, &weights.0, &mut rng.0).map(PyTree).map_err(err)
}

#[pyfunction]
fn shuff_complete(tree: &PyTree, weights: &PyWeights, rng: &mut PyRng) -> PyResult<PyTree> {
    shuffle::shuff_complete(&tree.0, &weights.0, &mut rng.0).map(PyTree).map_err(err)
}

/// Reduced tree R_k as a dict; `theta` is `[theta0, theta1, ...]`.
#[pyfunction]
fn line_break<'py>(py: Python<'py>, theta: Vec<f64>, k: usize, rng: &mut PyRng) -> PyResult<Bound<'py, PyAny>> {
    let rt = icrt::line_break(&parse_theta(theta)?, k, &mut rng.0).map_err(err)?;
    to_py(py, &rt)
}

#[pyfunction]
fn survival_eta1(theta: Vec<f64>, r: f64) -> PyResult<f64> {
    Ok(icrt::survival_eta1(&parse_theta(theta)?, r))
}

#[pyfunction]
fn build_pn(theta: Vec<f64>, n: usize) -> PyResult<PyWeights> {
    icrt::build_pn(&parse_theta(theta)?, n).map(PyWeights).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (theta, k, m = None, horizon = None, seed = verify::DEFAULT_SEED))]
fn genealogy<'py>(
    py: Python<'py>,
    theta: Vec<f64>,
    k: usize,
    m: Option<usize>,
    horizon: Option<f64>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let th = parse_theta(theta)?;
    let g = py
        .detach(|| icrt::genealogy_matrix(&th, k, m.unwrap_or(50 * k), horizon, &mut rng::master(seed)))
        .map_err(err)?;
    to_py(py, &g)
}

#[pyfunction]
fn suite_names() -> Vec<&'static str> {
    verify::suite_names()
}

/// Runs a verification suite; returns the verdicts as dicts.
#[pyfunction]
#[pyo3(signature = (name, seed = verify::DEFAULT_SEED))]
fn run_suite<'py>(py: Python<'py>, name: &str, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let name = name.to_string();
    let verdicts = py.detach(|| verify::run_suite(&name, seed)).map_err(err)?;
    to_py(py, &verdicts)
}

#[pymodule]
fn pycuttree(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWeights>()?;
    m.add_class::<PyTree>()?;
    m.add_class::<PyRng>()?;
    m.add_function(wrap_pyfunction!(sample_ptree, m)?)?;
    m.add_function(wrap_pyfunction!(ptree_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(cut_one_vertex, m)?)?;
    m.add_function(wrap_pyfunction!(cut_targets, m)?)?;
    m.add_function(wrap_pyfunction!(cut_all, m)?)?;
    m.add_function(wrap_pyfunction!(record_tree, m)?)?;
    m.add_function(wrap_pyfunction!(reverse, m)?)?;
    m.add_function(wrap_pyfunction!(shuff_one, m)?)?;
    m.add_function(wrap_pyfunction!(shuff_k, m)?)?;
    m.add_function(wrap_pyfunction!(shuff_complete, m)?)?;
    m.add_function(wrap_pyfunction!(line_break, m)?)?;
    m.add_function(wrap_pyfunction!(survival_eta1, m)?)?;
    m.add_function(wrap_pyfunction!(build_pn, m)?)?;
    m.add_function(wrap_pyfunction!(genealogy, m)?)?;
    m.add_function(wrap_pyfunction!(suite_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
