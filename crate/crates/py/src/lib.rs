//! Python bindings for `ttdensity`.
//!
//! Arrays cross the boundary as flat lists plus shapes, or as nested lists
//! for matrices; `numpy.ndarray.tolist()` and `numpy.reshape` convert.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ttdensity::experiments::setup::{gauss_grid, radar_grid, radar_tensor};
use ttdensity::experiments::{self, Experiment, ExperimentConfig, ExperimentError};
use ttdensity::grids::DenseTensor;
use ttdensity::gridtransform::SquareRootKind;
use ttdensity::linalg::{from_row_major, singular_values, Matrix};
use ttdensity::matdecomp::{self, PivotMode};
use ttdensity::quadratic::{self, SymmetricQ};
use ttdensity::{densities::RadarSpec, tt, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidGrid(_)
        | Error::ShapeMismatch(_)
        | Error::NonFinite { .. }
        | Error::InvalidArgument(_)
        | Error::RankOutOfRange { .. }
        | Error::IndexOutOfBounds { .. }
        | Error::NotPositiveDefinite(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn experiment_err(e: ExperimentError) -> PyErr {
    match e {
        ExperimentError::Config(m) => PyValueError::new_err(m),
        ExperimentError::Run(e) => py_err(e),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err(
            "expected a non-empty rectangular list of rows",
        ));
    }
    Ok(from_row_major(r, c, &rows.concat()))
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Tensor train with cores of shape (left rank, mode size, right rank).
#[pyclass(name = "TensorTrain", module = "ttdensity_py", frozen)]
struct PyTensorTrain(tt::TensorTrain);

#[pymethods]
impl PyTensorTrain {
    /// TT-SVD of a dense tensor given as a flat row-major list and a shape.
    #[staticmethod]
    #[pyo3(signature = (values, shape, eps = 1e-5))]
    fn from_dense(values: Vec<f64>, shape: Vec<usize>, eps: f64) -> PyResult<Self> {
        let t = DenseTensor::new(shape, values).map_err(py_err)?;
        Ok(PyTensorTrain(tt::tt_svd(&t, eps).map_err(py_err)?))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(PyTensorTrain)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.0.shape()
    }

    #[getter]
    fn ranks(&self) -> Vec<usize> {
        self.0.ranks()
    }

    #[getter]
    fn storage(&self) -> usize {
        self.0.storage()
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn __getitem__(&self, index: Vec<usize>) -> PyResult<f64> {
        tt::tt_eval(&self.0, &index).map_err(py_err)
    }

    /// Flat row-major values.
    fn to_dense(&self) -> PyResult<Vec<f64>> {
        Ok(tt::tt_dense(&self.0).map_err(py_err)?.into_values())
    }

    fn round(&self, eps: f64) -> PyResult<Self> {
        Ok(PyTensorTrain(tt::tt_round(&self.0, eps).map_err(py_err)?))
    }

    fn hadamard(&self, other: &PyTensorTrain) -> PyResult<Self> {
        Ok(PyTensorTrain(
            tt::tt_hadamard(&self.0, &other.0).map_err(py_err)?,
        ))
    }

    fn __repr__(&self) -> String {
        format!(
            "TensorTrain(shape={:?}, ranks={:?})",
            self.0.shape(),
            self.0.ranks()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (values, shape, eps = 1e-5))]
fn tt_svd(values: Vec<f64>, shape: Vec<usize>, eps: f64) -> PyResult<PyTensorTrain> {
    PyTensorTrain::from_dense(values, shape, eps)
}

/// Returns `(u, s, v)` with `m ~ u diag(s) v^T`.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn truncated_svd(
    m: Vec<Vec<f64>>,
    rank: usize,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>)> {
    let t = matdecomp::truncated_svd(&matrix(m)?, rank).map_err(py_err)?;
    Ok((rows(&t.u), t.s.clone(), rows(&t.v)))
}

/// Greedy cross approximation; returns a dict with pivots and the reconstruction.
#[pyfunction]
#[pyo3(signature = (m, rank, seed = 0, pivot = "full"))]
fn cross<'py>(
    py: Python<'py>,
    m: Vec<Vec<f64>>,
    rank: usize,
    seed: u64,
    pivot: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let mode: PivotMode = pivot.parse().map_err(py_err)?;
    let f = matdecomp::cross_greedy(&matrix(m)?, rank, seed, mode).map_err(py_err)?;
    let approx = matdecomp::cross_reconstruct(&f).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("rows", f.row_indices.clone())?;
    d.set_item("columns", f.col_indices.clone())?;
    d.set_item("rank_deficient", f.rank_deficient)?;
    d.set_item("approximation", rows(&approx))?;
    Ok(d)
}

#[pyfunction]
fn matrix_singular_values(m: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    singular_values(&matrix(m)?).map_err(py_err)
}

/// Singular values of the default radar density on its grid.
#[pyfunction]
#[pyo3(signature = (step = 0.2))]
fn radar_singular_values(step: f64) -> PyResult<Vec<f64>> {
    let grid = radar_grid(step).map_err(py_err)?;
    let t = radar_tensor(&RadarSpec::default(), &grid).map_err(py_err)?;
    singular_values(&t.to_matrix().map_err(py_err)?).map_err(py_err)
}

/// Squeezed functional-TT ranks of `x^T Q x`.
#[pyfunction]
fn quadratic_rank_report(q: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
    let q = SymmetricQ::new(matrix(q)?).map_err(py_err)?;
    quadratic::quadratic_rank_report(&q).map_err(py_err)
}

/// Evaluates the functional train of `x^T Q x` at `x`.
#[pyfunction]
#[pyo3(signature = (q, x, squeeze = true))]
fn quadratic_eval(q: Vec<Vec<f64>>, x: Vec<f64>, squeeze: bool) -> PyResult<f64> {
    let q = SymmetricQ::new(matrix(q)?).map_err(py_err)?;
    let mut cores = quadratic::build_quadratic_cores(&q).map_err(py_err)?;
    if squeeze {
        cores = quadratic::squeeze_cores(&cores);
    }
    quadratic::eval_quadratic_cores(&cores, &x).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (q, kind = "symmetric"))]
fn covariance_square_root(q: Vec<Vec<f64>>, kind: &str) -> PyResult<Vec<Vec<f64>>> {
    let kind: SquareRootKind = kind.parse().map_err(py_err)?;
    let r = ttdensity::gridtransform::covariance_square_root(&matrix(q)?, kind).map_err(py_err)?;
    Ok(rows(&r))
}

/// TT ranks and negative percentage for a 4-D Gaussian with coupled 1-based pairs.
#[pyfunction]
#[pyo3(signature = (pairs, correlation = 0.5, eps = 1e-5, step = 0.2))]
fn gauss_ranks<'py>(
    py: Python<'py>,
    pairs: Vec<(usize, usize)>,
    correlation: f64,
    eps: f64,
    step: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = gauss_grid(step).map_err(py_err)?;
    let case = py
        .detach(|| experiments::gauss_case(&grid, "custom", &pairs, correlation, eps))
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("ranks", case.ranks)?;
    d.set_item("negative_percent", case.negative_percent)?;
    d.set_item("relative_error", case.relative_error)?;
    Ok(d)
}

/// Runs a named experiment and returns the written artifact paths.
#[pyfunction]
#[pyo3(signature = (name, out, seed = 0, eps = 1e-5, overrides = None))]
fn run_experiment(
    py: Python<'_>,
    name: &str,
    out: PathBuf,
    seed: u64,
    eps: f64,
    overrides: Option<Vec<(String, String)>>,
) -> PyResult<Vec<PathBuf>> {
    let experiment: Experiment = name.parse().map_err(experiment_err)?;
    let mut cfg = ExperimentConfig::new(experiment, out);
    cfg.seed = seed;
    cfg.eps = eps;
    cfg.overrides.extend(overrides.unwrap_or_default());
    py.detach(|| experiments::run(&cfg)).map_err(experiment_err)
}

#[pymodule]
pub fn ttdensity_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTensorTrain>()?;
    m.add_function(wrap_pyfunction!(tt_svd, m)?)?;
    m.add_function(wrap_pyfunction!(truncated_svd, m)?)?;
    m.add_function(wrap_pyfunction!(cross, m)?)?;
    m.add_function(wrap_pyfunction!(matrix_singular_values, m)?)?;
    m.add_function(wrap_pyfunction!(radar_singular_values, m)?)?;
    m.add_function(wrap_pyfunction!(quadratic_rank_report, m)?)?;
    m.add_function(wrap_pyfunction!(quadratic_eval, m)?)?;
    m.add_function(wrap_pyfunction!(covariance_square_root, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_ranks, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
