//! Python module `pact`: tree models, simulation, limit theory and exact
//! oracles. Structured results come back as plain dicts and lists.

use pact_core::harness::suite::{run_criterion, run_suite, SuiteScale};
use pact_core::harness::{run_experiment, root_cluster_sizes, ExperimentConfig, Statistic};
use pact_core::moments;
use pact_core::oracle;
use pact_core::pattern::ColouredPattern;
use pact_core::rng::replicate_rng;
use pact_core::stats::stat_vector;
use pact_core::theory::{self, GlobalStatistic};
use pact_core::tree::{grow_coloured_tree, AlphaSpec};
use pact_core::PactError;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: PactError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Tree model: `Model(p, alpha=...)` or `Model(p, dary=...)`.
#[pyclass(name = "Model", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyModel(pact_core::tree::Model);

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (p, alpha=None, dary=None))]
    fn new(p: f64, alpha: Option<f64>, dary: Option<u32>) -> PyResult<Self> {
        let m = match (alpha, dary) {
            (Some(a), None) => pact_core::tree::Model::with_alpha(a, p),
            (None, Some(d)) => pact_core::tree::Model::dary(d, p),
            _ => return Err(PyValueError::new_err("give exactly one of alpha and dary")),
        };
        m.map(PyModel).map_err(err)
    }

    #[getter]
    fn p(&self) -> f64 {
        self.0.p()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    #[getter]
    fn dary(&self) -> Option<u32> {
        self.0.arity()
    }

    #[getter]
    fn lambda1(&self) -> f64 {
        self.0.lambda1()
    }

    #[getter]
    fn lambda2(&self) -> f64 {
        self.0.lambda2()
    }

    fn regime(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &theory::regime(&self.0))
    }

    /// First two moments of the martingale limit (supercritical only).
    fn z_moments(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &theory::z_moments(&self.0).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        match self.0.alpha_spec() {
            AlphaSpec::NonNegative(a) => format!("Model(p={}, alpha={a})", self.0.p()),
            AlphaSpec::DAry(d) => format!("Model(p={}, dary={d})", self.0.p()),
        }
    }
}

/// One grown tree as `(parents, colours)`; the root's parent is -1 and
/// colours are `"R"`/`"B"` letters.
#[pyfunction]
#[pyo3(signature = (model, n, seed=0, rep=0))]
fn grow_tree(model: &PyModel, n: usize, seed: u64, rep: u64) -> PyResult<(Vec<i64>, String)> {
    let tree = grow_coloured_tree(&model.0, n, &mut replicate_rng(seed, rep)).map_err(err)?;
    let parents = (0..tree.len()).map(|v| tree.parent(v).map_or(-1, |u| u as i64)).collect();
    let colours = tree.colours().iter().map(|c| c.letter()).collect();
    Ok((parents, colours))
}

/// Colour, cluster and leaf counts plus the root cluster of one grown tree.
#[pyfunction]
#[pyo3(signature = (model, n, seed=0, rep=0))]
fn tree_statistics(py: Python<'_>, model: &PyModel, n: usize, seed: u64, rep: u64) -> PyResult<Py<PyAny>> {
    let tree = grow_coloured_tree(&model.0, n, &mut replicate_rng(seed, rep)).map_err(err)?;
    to_py(py, &stat_vector(&tree))
}

/// Monte Carlo report with per-statistic comparisons against the theory.
#[pyfunction]
#[pyo3(signature = (model, n, reps=100, seed=0, stats=None))]
fn simulate(py: Python<'_>, model: &PyModel, n: usize, reps: usize, seed: u64, stats: Option<Vec<String>>) -> PyResult<Py<PyAny>> {
    let names = stats.unwrap_or_else(|| ["vertices", "clusters", "leaves", "rootcluster"].map(String::from).to_vec());
    let statistics = names.iter().map(|s| Statistic::parse(s)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    let config = ExperimentConfig::new(model.0, n, reps, seed, statistics).map_err(err)?;
    let report = py.detach(|| run_experiment(&config)).map_err(err)?;
    to_py(py, &report)
}

/// Root-cluster sizes of `reps` independent trees.
#[pyfunction]
#[pyo3(signature = (model, n, reps, seed=0))]
fn sample_root_clusters(py: Python<'_>, model: &PyModel, n: usize, reps: usize, seed: u64) -> PyResult<Vec<u64>> {
    let m = model.0;
    py.detach(|| root_cluster_sizes(&m, n, reps, seed)).map_err(err)
}

/// Limit prediction for `vertices`, `clusters`, `leaves`, `fringe...` or
/// `urn:...`, in the same syntax as the simulation statistics.
#[pyfunction]
fn global_limit(py: Python<'_>, model: &PyModel, statistic: &str) -> PyResult<Py<PyAny>> {
    let prediction = match Statistic::parse(statistic).map_err(err)? {
        Statistic::Vertices => theory::global_limit(&GlobalStatistic::Vertices, &model.0),
        Statistic::Clusters => theory::global_limit(&GlobalStatistic::Clusters, &model.0),
        Statistic::Leaves => theory::global_limit(&GlobalStatistic::Leaves, &model.0),
        Statistic::Fringe(ps) => theory::global_limit(&GlobalStatistic::Fringe(ps), &model.0),
        Statistic::Urn(kind) => theory::urn_prediction(&kind, &model.0),
        Statistic::RootCluster => return Err(PyValueError::new_err("use root_cluster_limit for the root cluster")),
    }
    .map_err(err)?;
    to_py(py, &prediction)
}

/// Limit law of the root cluster: scaling plus the first `kmax` moments.
#[pyfunction]
#[pyo3(signature = (model, kmax=4))]
fn root_cluster_limit(py: Python<'_>, model: &PyModel, kmax: usize) -> PyResult<Py<PyAny>> {
    to_py(py, &moments::root_cluster_limit(&model.0, kmax).map_err(err)?)
}

/// Limiting probability that the root cluster is infinite (`d`-ary).
#[pyfunction]
fn p_infinity(d: u32, p: f64) -> PyResult<f64> {
    moments::p_infinity(d, p).map_err(err)
}

/// `P(|C| = k)` of the limiting root cluster for `k = 0..=kmax` (`d`-ary).
#[pyfunction]
fn otter_dwass_pmf(d: u32, p: f64, kmax: usize) -> PyResult<Vec<f64>> {
    moments::otter_dwass_pmf(d, p, kmax).map_err(err)
}

/// Exact `P(|C_n| = k)` for `k = 0..=n`.
#[pyfunction]
fn exact_root_cluster_pmf(model: &PyModel, n: usize) -> PyResult<Vec<f64>> {
    oracle::exact_root_cluster_pmf(&model.0, n).map_err(err)
}

/// Uniform attachment only: explicit `P(|C_n| = k)` for `k = 0..=n`.
#[pyfunction]
fn closed_form_pmf(n: usize, p: f64) -> PyResult<Vec<f64>> {
    oracle::closed_form_pmf_alpha0(n, p).map_err(err)
}

/// `E[(|C_m|)_k]` for `m = 0..=n`.
#[pyfunction]
fn falling_moments(model: &PyModel, k: usize, n: usize) -> PyResult<Vec<f64>> {
    oracle::series_moments(&model.0, k, n).map_err(err)
}

/// Exact law of the whole coloured tree for small `n`, as
/// `[(pattern, probability)]` over isomorphism classes.
#[pyfunction]
fn enumerate_trees(model: &PyModel, n: usize) -> PyResult<Vec<(String, f64)>> {
    let law = oracle::enumerate_small(&model.0, n).map_err(err)?;
    Ok(law.classes.iter().map(|c| (c.pattern.to_string(), c.prob)).collect())
}

/// Canonical form of a pattern such as `R(B,R(B))`.
#[pyfunction]
fn canonical_pattern(text: &str) -> PyResult<String> {
    Ok(ColouredPattern::parse(text).map_err(err)?.to_string())
}

/// Runs one acceptance criterion, or all of them when `criterion` is None.
#[pyfunction]
#[pyo3(signature = (criterion=None, suite="quick", seed=42))]
fn verify(py: Python<'_>, criterion: Option<&str>, suite: &str, seed: u64) -> PyResult<Py<PyAny>> {
    let scale: SuiteScale = suite.parse().map_err(err)?;
    match criterion {
        Some(id) => {
            let id = id.to_string();
            let out = py.detach(|| run_criterion(&id, scale, seed)).map_err(err)?;
            to_py(py, &out)
        }
        None => {
            let out = py.detach(|| run_suite(scale, seed, |_| {})).map_err(err)?;
            to_py(py, &out)
        }
    }
}

#[pymodule]
fn pact(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(grow_tree, m)?)?;
    m.add_function(wrap_pyfunction!(tree_statistics, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(sample_root_clusters, m)?)?;
    m.add_function(wrap_pyfunction!(global_limit, m)?)?;
    m.add_function(wrap_pyfunction!(root_cluster_limit, m)?)?;
    m.add_function(wrap_pyfunction!(p_infinity, m)?)?;
    m.add_function(wrap_pyfunction!(otter_dwass_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(exact_root_cluster_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(falling_moments, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_trees, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
