//! Python bindings for the `infothresh` simulator.
//!
//! Model parameters are passed as keyword arguments using the same names as
//! the JSON experiment config (`m`, `n`, `p0`, `edge_flip`, `gm_flip`,
//! `prior`, `epsilon`, `steps`, ...). Structured results come back as plain
//! dicts and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use pythonize::{depythonize, pythonize};

use infothresh::harness::{self, ExperimentConfig, SweepAxis};
use infothresh::{UserId, VictimInstance, Which};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<ExperimentConfig> {
    match kwargs {
        Some(d) => Ok(depythonize(d.as_any())?),
        None => Ok(ExperimentConfig::default()),
    }
}

fn which(name: &str) -> PyResult<Which> {
    match name {
        "true" => Ok(Which::True),
        "scanned" => Ok(Which::Scanned),
        _ => Err(PyValueError::new_err(format!("graph must be 'true' or 'scanned', got '{name}'"))),
    }
}

/// A true membership graph and its noisy scan over the same users and groups.
#[pyclass(name = "BigraphPair", module = "infothresh", frozen)]
struct PyBigraphPair {
    inner: infothresh::BigraphPair,
    config: ExperimentConfig,
}

#[pymethods]
impl PyBigraphPair {
    /// Sample a pair from the edge model in the keyword config.
    #[staticmethod]
    #[pyo3(signature = (seed, **kwargs))]
    fn generate(seed: u64, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let config = config(kwargs)?;
        let model = config.resolve().map_err(value_error)?;
        let inner = infothresh::generate_cprb(config.n, config.m, &model.edge_joint, seed).map_err(value_error)?;
        Ok(Self { inner, config })
    }

    #[staticmethod]
    #[pyo3(signature = (text, **kwargs))]
    fn from_json(text: &str, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let inner = infothresh::BigraphPair::from_json(text).map_err(value_error)?;
        let mut config = config(kwargs)?;
        config.m = inner.m();
        config.n = inner.n();
        Ok(Self { inner, config })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(value_error)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    /// Whether `user` belongs to `group` (both 1-based).
    fn edge(&self, graph: &str, user: usize, group: usize) -> PyResult<bool> {
        self.inner.check_user(UserId(user)).map_err(value_error)?;
        self.inner.check_group(infothresh::GroupId(group)).map_err(value_error)?;
        Ok(self.inner.edge(which(graph)?, UserId(user), infothresh::GroupId(group)))
    }

    fn group_signature(&self, graph: &str, user: usize) -> PyResult<Vec<bool>> {
        let sig = self.inner.group_signature(which(graph)?, UserId(user)).map_err(value_error)?;
        Ok(sig.iter().collect())
    }

    fn members(&self, graph: &str, group: usize) -> PyResult<Vec<usize>> {
        let set = self.inner.members(which(graph)?, infothresh::GroupId(group)).map_err(value_error)?;
        Ok(set.into_iter().map(|u| u.0).collect())
    }

    /// Attack `victim` with the information threshold strategy using the
    /// model this pair was built with. Returns the transcript as a dict.
    #[pyo3(signature = (victim, noise_seed=0, order_seed=0))]
    fn run_its<'py>(&self, py: Python<'py>, victim: usize, noise_seed: u64, order_seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let model = self.config.resolve().map_err(value_error)?;
        let inst = VictimInstance::new(&self.inner, UserId(victim), model.gm, noise_seed).map_err(value_error)?;
        let mut its = model.its;
        its.order_seed = order_seed;
        let t = infothresh::run_its(&self.inner, &inst, &model.prior, &model.measures, &its).map_err(value_error)?;
        Ok(pythonize(py, &t)?)
    }

    fn __repr__(&self) -> String {
        format!("BigraphPair(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

/// Mutual information, maximum density and the density table of the model.
#[pyfunction]
#[pyo3(signature = (**kwargs))]
fn measures<'py>(py: Python<'py>, kwargs: Option<&Bound<'py, PyDict>>) -> PyResult<Bound<'py, PyDict>> {
    let mut config = config(kwargs)?;
    config.allow_degenerate = true;
    let model = config.resolve().map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("mutual_info", model.measures.mutual_info)?;
    d.set_item("i_max", model.measures.i_max)?;
    d.set_item("density", model.measures.density)?;
    d.set_item("entropy", model.entropy)?;
    Ok(d)
}

/// Prior probabilities for `m` users, e.g. `prior("zipf:1.0", 8)`.
#[pyfunction]
fn prior(kind: &str, m: usize) -> PyResult<Vec<f64>> {
    let kind: infothresh::PriorKind = kind.parse().map_err(value_error)?;
    Ok(infothresh::make_prior(&kind, m).map_err(value_error)?.probs().to_vec())
}

#[pyfunction]
fn asymptotic_params(m: usize) -> (f64, usize) {
    infothresh::asymptotic_params(m)
}

/// Bound report for the keyword config.
#[pyfunction]
#[pyo3(signature = (**kwargs))]
fn bounds<'py>(py: Python<'py>, kwargs: Option<&Bound<'py, PyDict>>) -> PyResult<Bound<'py, PyAny>> {
    let model = config(kwargs)?.resolve().map_err(value_error)?;
    Ok(pythonize(py, &model.bounds)?)
}

/// Run a Monte Carlo campaign and return its summary.
#[pyfunction]
#[pyo3(signature = (**kwargs))]
fn run_experiment<'py>(py: Python<'py>, kwargs: Option<&Bound<'py, PyDict>>) -> PyResult<Bound<'py, PyAny>> {
    let config = config(kwargs)?;
    let summary = py.allow_threads(|| harness::run_experiment(&config)).map_err(value_error)?;
    Ok(pythonize(py, &summary)?)
}

/// Run one campaign per value of `axis` ("m", "noise" or "zipf").
#[pyfunction]
#[pyo3(signature = (axis, points, **kwargs))]
fn run_sweep<'py>(
    py: Python<'py>,
    axis: &str,
    points: Vec<f64>,
    kwargs: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyAny>> {
    let config = config(kwargs)?;
    let axis: SweepAxis = axis.parse().map_err(value_error)?;
    let summaries = py
        .allow_threads(|| harness::run_sweep(&config, axis, &points))
        .map_err(value_error)?;
    Ok(pythonize(py, &summaries)?)
}

#[pymodule]
#[pyo3(name = "infothresh")]
fn infothresh_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBigraphPair>()?;
    m.add_function(wrap_pyfunction!(measures, m)?)?;
    m.add_function(wrap_pyfunction!(prior, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_params, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
