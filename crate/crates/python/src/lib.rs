//! Python bindings for the stable knapsack algorithms and measurement tools.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use stable_knapsack::dynamic::{decremental_simulate, stream_simulate};
use stable_knapsack::instances::{self, Dist, RandomSpec};
use stable_knapsack::sensitivity::{deterministic_sensitivity, mc_sensitivity_upper};
use stable_knapsack::{exact, fractional, tolerance, AlgorithmKind, Error, Item, ItemId, SeededSource, Solution};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn json_loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn ids(solution: &Solution) -> Vec<u64> {
    solution.iter().map(|id| id.0).collect()
}

/// A knapsack instance: items `(id, value, weight)` and a weight limit.
#[pyclass(name = "Instance", frozen)]
struct PyInstance(stable_knapsack::Instance);

#[pymethods]
impl PyInstance {
    #[new]
    #[pyo3(signature = (items, weight_limit = 1.0))]
    fn new(items: Vec<(u64, f64, f64)>, weight_limit: f64) -> PyResult<Self> {
        let items = items.into_iter().map(|(i, v, w)| Item::new(i, v, w)).collect();
        stable_knapsack::Instance::new(items, weight_limit).map(PyInstance).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        instances::parse_instance(text, std::path::Path::new("<string>"))
            .map(PyInstance)
            .map_err(to_py)
    }

    #[staticmethod]
    fn read(path: std::path::PathBuf) -> PyResult<Self> {
        instances::read_instance(path).map(PyInstance).map_err(to_py)
    }

    fn write(&self, path: std::path::PathBuf) -> PyResult<()> {
        instances::write_instance(&self.0, path).map_err(to_py)
    }

    fn to_json(&self) -> String {
        instances::instance_to_json(&self.0)
    }

    #[getter]
    fn weight_limit(&self) -> f64 {
        self.0.weight_limit()
    }

    #[getter]
    fn items(&self) -> Vec<(u64, f64, f64)> {
        self.0.items().iter().map(|it| (it.id.0, it.value, it.weight)).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Instance(n={}, weight_limit={})", self.0.len(), self.0.weight_limit())
    }

    fn delete_item(&self, id: u64) -> PyResult<Self> {
        self.0.delete_item(ItemId(id)).map(PyInstance).map_err(to_py)
    }

    fn value_of(&self, ids: Vec<u64>) -> PyResult<f64> {
        self.0.value_of(&Solution::from_raw(ids)).map_err(to_py)
    }

    fn weight_of(&self, ids: Vec<u64>) -> PyResult<f64> {
        self.0.weight_of(&Solution::from_raw(ids)).map_err(to_py)
    }
}

fn kind(name: &str) -> PyResult<AlgorithmKind> {
    name.parse().map_err(to_py)
}

/// Runs algorithm `alg` once; returns `{"solution": [...], "transcript": [...]}`.
#[pyfunction]
#[pyo3(signature = (alg, instance, eps = 0.25, seed = 0))]
fn solve<'py>(py: Python<'py>, alg: &str, instance: &PyInstance, eps: f64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let algorithm = kind(alg)?.with_eps(eps).map_err(to_py)?;
    let run = algorithm
        .run(&instance.0, &mut SeededSource::new(seed))
        .map_err(to_py)?;
    json_loads(py, &serde_json::to_string(&run).map_err(|e| PyValueError::new_err(e.to_string()))?)
}

/// Fractional optimum with the instance's own limit.
#[pyfunction]
fn fopt(instance: &PyInstance) -> f64 {
    fractional::fopt(&instance.0)
}

/// Integral optimum by exhaustive search: `(value, ids)`.
#[pyfunction]
fn brute_force_opt(instance: &PyInstance) -> PyResult<(f64, Vec<u64>)> {
    let opt = exact::brute_force_opt(&instance.0.normalized()).map_err(to_py)?;
    Ok((opt.value, ids(&opt.solution)))
}

/// Average sensitivity report as a dict: exact for deterministic
/// algorithms, a coupled Monte Carlo upper bound otherwise.
#[pyfunction]
#[pyo3(signature = (alg, instance, eps = 0.25, trials = 1000, seed = 0))]
fn sensitivity<'py>(
    py: Python<'py>,
    alg: &str,
    instance: &PyInstance,
    eps: f64,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let algorithm = kind(alg)?.with_eps(eps).map_err(to_py)?;
    let report = py
        .detach(|| {
            if algorithm.is_deterministic() {
                deterministic_sensitivity(&algorithm, &instance.0)
            } else {
                mc_sensitivity_upper(&algorithm, &instance.0, trials, seed)
            }
        })
        .map_err(to_py)?;
    json_loads(py, &report.to_json())
}

/// Recourse report of one stream as a dict; `mode` is `"incr"` or `"decr"`.
#[pyfunction]
#[pyo3(signature = (instance, alg = "fpras", eps = 0.25, seed = 0, mode = "incr", order = None))]
fn stream<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    alg: &str,
    eps: f64,
    seed: u64,
    mode: &str,
    order: Option<Vec<u64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let algorithm = kind(alg)?.with_eps(eps).map_err(to_py)?;
    let simulate = match mode {
        "incr" => stream_simulate,
        "decr" => decremental_simulate,
        other => return Err(PyValueError::new_err(format!("mode must be incr or decr, got {other:?}"))),
    };
    let order = order.map(|o| o.into_iter().map(ItemId).collect());
    let log = py
        .detach(|| simulate(&instance.0, &algorithm, seed, order))
        .map_err(to_py)?;
    json_loads(py, &log.report.to_json())
}

#[pyfunction]
fn gen_prop2(k: usize) -> PyResult<PyInstance> {
    instances::gen_prop2(k).map(PyInstance).map_err(to_py)
}

#[pyfunction]
fn gen_lowerbound(eps: f64) -> PyResult<PyInstance> {
    instances::gen_lowerbound(eps).map(PyInstance).map_err(to_py)
}

/// Values and weights uniform on `(0, 1]`; `simple` sets every value to its weight.
#[pyfunction]
#[pyo3(signature = (n, seed = 0, simple = false))]
fn gen_random(n: usize, seed: u64, simple: bool) -> PyResult<PyInstance> {
    let spec = RandomSpec {
        simple,
        ..RandomSpec::uniform(n)
    };
    instances::gen_random(&spec, seed).map(PyInstance).map_err(to_py)
}

/// Random instance with Pareto-distributed values and weights `1/x`.
#[pyfunction]
#[pyo3(signature = (n, value_alpha, weight_alpha, seed = 0))]
fn gen_pareto(n: usize, value_alpha: f64, weight_alpha: f64, seed: u64) -> PyResult<PyInstance> {
    let spec = RandomSpec {
        n,
        values: Dist::Pareto { alpha: value_alpha },
        weights: Dist::Pareto { alpha: weight_alpha },
        simple: false,
    };
    instances::gen_random(&spec, seed).map(PyInstance).map_err(to_py)
}

#[pyfunction]
fn get_tolerance() -> f64 {
    tolerance::tolerance()
}

#[pyfunction]
fn set_tolerance(tol: f64) -> PyResult<()> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(PyValueError::new_err("tolerance must be finite and nonnegative"));
    }
    tolerance::set_tolerance(tol);
    Ok(())
}

#[pymodule]
fn stable_knapsack_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    tolerance::init_from_env().map_err(to_py)?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(fopt, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_opt, m)?)?;
    m.add_function(wrap_pyfunction!(sensitivity, m)?)?;
    m.add_function(wrap_pyfunction!(stream, m)?)?;
    m.add_function(wrap_pyfunction!(gen_prop2, m)?)?;
    m.add_function(wrap_pyfunction!(gen_lowerbound, m)?)?;
    m.add_function(wrap_pyfunction!(gen_random, m)?)?;
    m.add_function(wrap_pyfunction!(gen_pareto, m)?)?;
    m.add_function(wrap_pyfunction!(get_tolerance, m)?)?;
    m.add_function(wrap_pyfunction!(set_tolerance, m)?)?;
    Ok(())
}
