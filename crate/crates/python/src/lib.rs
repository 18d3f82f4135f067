//! Python bindings. Matrices cross the boundary as lists of rows.

use mde_core::oracle::{self, MeasureSpec};
use mde_core::{bench, solver, ErrorDist, Init, MdeError as CoreError, ParameterVector, SolverConfig, WeightMatrix};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

create_exception!(mde, MdeError, PyValueError, "Invalid input or configuration.");

fn to_py(e: CoreError) -> PyErr {
    match e {
        CoreError::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => MdeError::new_err(e.to_string()),
    }
}

/// Response vector and design matrix.
#[pyclass(name = "RegressionData", module = "mde", frozen)]
pub struct PyRegressionData {
    inner: mde_core::RegressionData,
}

#[pymethods]
impl PyRegressionData {
    #[new]
    fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> PyResult<Self> {
        let inner = mde_core::RegressionData::from_rows(&x, y).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Reads a headed CSV file; `response` is a column name or index.
    #[staticmethod]
    fn from_csv(path: &str, response: ResponseArg) -> PyResult<Self> {
        let inner = match response {
            ResponseArg::Name(name) => mde_core::load_csv(path, name.as_str()),
            ResponseArg::Index(i) => mde_core::load_csv(path, mde_core::ColumnRef::Index(i)),
        }
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn x(&self) -> Vec<Vec<f64>> {
        (0..self.inner.n()).map(|i| self.inner.row(i).to_vec()).collect()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.inner.y().to_vec()
    }

    fn to_csv(&self, path: &str) -> PyResult<()> {
        let file = std::fs::File::create(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
        mde_core::write_csv(&self.inner, std::io::BufWriter::new(file)).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("RegressionData(n={}, p={})", self.inner.n(), self.inner.p())
    }
}

#[derive(FromPyObject)]
enum ResponseArg {
    Name(String),
    Index(usize),
}

#[derive(FromPyObject)]
enum InitArg {
    Named(String),
    Values(Vec<f64>),
}

/// Outcome of a fit.
#[pyclass(name = "FitResult", module = "mde", frozen, get_all)]
pub struct PyFitResult {
    estimate: Vec<f64>,
    loss: f64,
    sweeps: usize,
    converged: bool,
    elapsed_seconds: f64,
    loss_trace: Vec<f64>,
    candidate_counts: Vec<usize>,
}

#[pymethods]
impl PyFitResult {
    #[getter]
    fn mean_candidates(&self) -> f64 {
        if self.candidate_counts.is_empty() {
            return 0.0;
        }
        self.candidate_counts.iter().sum::<usize>() as f64 / self.candidate_counts.len() as f64
    }

    fn __repr__(&self) -> String {
        format!(
            "FitResult(estimate={:?}, loss={:?}, sweeps={}, converged={})",
            self.estimate,
            self.loss,
            self.sweeps,
            if self.converged { "True" } else { "False" }
        )
    }
}

impl From<mde_core::FitResult> for PyFitResult {
    fn from(r: mde_core::FitResult) -> Self {
        Self {
            elapsed_seconds: r.elapsed.as_secs_f64(),
            estimate: r.estimate.into_inner(),
            loss: r.loss,
            sweeps: r.sweeps,
            converged: r.converged,
            loss_trace: r.loss_trace,
            candidate_counts: r.candidate_counts,
        }
    }
}

fn weights_for(data: &mde_core::RegressionData, weights: Option<Vec<Vec<f64>>>) -> PyResult<WeightMatrix> {
    match weights {
        None => Ok(mde_core::default_weights(data)),
        Some(rows) => {
            let w = WeightMatrix::from_rows(&rows).map_err(to_py)?;
            w.check_matches(data).map_err(to_py)?;
            Ok(w)
        }
    }
}

fn tables_for(
    data: &mde_core::RegressionData,
    weights: Option<Vec<Vec<f64>>>,
) -> PyResult<mde_core::PairTables> {
    let w = weights_for(data, weights)?;
    mde_core::build_pair_tables(data, &w).map_err(to_py)
}

fn check_b(data: &mde_core::RegressionData, b: &[f64]) -> PyResult<()> {
    if b.len() != data.p() {
        return Err(MdeError::new_err(format!("b has {} entries, expected {}", b.len(), data.p())));
    }
    Ok(())
}

/// Coordinate-wise minimum distance fit.
#[pyfunction]
#[pyo3(signature = (data, weights=None, init=None, tol_param=1e-8, tol_loss=1e-10, max_sweeps=100, threads=0))]
#[allow(clippy::too_many_arguments)]
fn fit(
    py: Python<'_>,
    data: &PyRegressionData,
    weights: Option<Vec<Vec<f64>>>,
    init: Option<InitArg>,
    tol_param: f64,
    tol_loss: f64,
    max_sweeps: usize,
    threads: usize,
) -> PyResult<PyFitResult> {
    let init = match init {
        None => Init::Ols,
        Some(InitArg::Named(name)) => match name.as_str() {
            "ols" => Init::Ols,
            "zeros" => Init::Zeros,
            other => return Err(MdeError::new_err(format!("init must be 'ols', 'zeros' or a list, got {other:?}"))),
        },
        Some(InitArg::Values(values)) => Init::User(ParameterVector::new(values).map_err(to_py)?),
    };
    let config = SolverConfig {
        tol_param,
        tol_loss,
        max_sweeps,
        init,
        threads,
    };
    let w = weights_for(&data.inner, weights)?;
    let res = py.detach(|| mde_core::fit(&data.inner, &w, &config)).map_err(to_py)?;
    Ok(res.into())
}

/// Nelder–Mead search on the same distance, for comparison. Starts from
/// least squares unless `init` is given.
#[pyfunction]
#[pyo3(signature = (data, weights=None, init=None, max_evals=None))]
fn nelder_mead_fit(
    py: Python<'_>,
    data: &PyRegressionData,
    weights: Option<Vec<Vec<f64>>>,
    init: Option<Vec<f64>>,
    max_evals: Option<usize>,
) -> PyResult<PyFitResult> {
    let p = data.inner.p();
    let w = weights_for(&data.inner, weights)?;
    let init = match init {
        Some(values) => ParameterVector::new(values).map_err(to_py)?,
        None => solver::ols(&data.inner).unwrap_or_else(|| ParameterVector::zeros(p)),
    };
    let budget = max_evals.unwrap_or_else(|| bench::default_nm_budget(p));
    let res = py
        .detach(|| bench::nelder_mead_fit(&data.inner, &w, &init, budget))
        .map_err(to_py)?;
    Ok(res.into())
}

/// Distance at `b`, from the closed form.
#[pyfunction]
#[pyo3(signature = (data, b, weights=None))]
fn loss(data: &PyRegressionData, b: Vec<f64>, weights: Option<Vec<Vec<f64>>>) -> PyResult<f64> {
    check_b(&data.inner, &b)?;
    let tables = tables_for(&data.inner, weights)?;
    mde_core::loss(&tables, &b).map_err(to_py)
}

/// Distance at `b`, by integrating the defining expression directly.
#[pyfunction]
#[pyo3(signature = (data, b, weights=None))]
fn loss_by_integration(data: &PyRegressionData, b: Vec<f64>, weights: Option<Vec<Vec<f64>>>) -> PyResult<f64> {
    check_b(&data.inner, &b)?;
    let w = weights_for(&data.inner, weights)?;
    oracle::loss_by_integration(&data.inner, &w, &b, MeasureSpec::Lebesgue).map_err(to_py)
}

/// Exact minimizer along coordinate `l` (0-based) with the others held at `b`.
#[pyfunction]
#[pyo3(signature = (data, b, l, weights=None))]
fn coordinate_update(data: &PyRegressionData, b: Vec<f64>, l: usize, weights: Option<Vec<Vec<f64>>>) -> PyResult<f64> {
    check_b(&data.inner, &b)?;
    let tables = tables_for(&data.inner, weights)?;
    mde_core::coordinate_update(&tables, &b, l).map_err(to_py)
}

/// Reference minimizer along coordinate `l`; returns `(z, objective)`.
#[pyfunction]
#[pyo3(signature = (data, b, l, weights=None))]
fn brute_force_coordinate_min(
    data: &PyRegressionData,
    b: Vec<f64>,
    l: usize,
    weights: Option<Vec<Vec<f64>>>,
) -> PyResult<(f64, f64)> {
    check_b(&data.inner, &b)?;
    let tables = tables_for(&data.inner, weights)?;
    oracle::brute_force_coordinate_min(&tables, &b, l).map_err(to_py)
}

/// Gaussian design with `y = x beta + e`; `sigma` is the standard deviation,
/// Laplace scale or uniform half-width.
#[pyfunction]
#[pyo3(signature = (n, p, beta=None, error="normal", sigma=1.0, seed=0))]
fn simulate(
    n: usize,
    p: usize,
    beta: Option<Vec<f64>>,
    error: &str,
    sigma: f64,
    seed: u64,
) -> PyResult<PyRegressionData> {
    let beta = match beta {
        Some(values) => ParameterVector::new(values).map_err(to_py)?,
        None => bench::bench_beta(p),
    };
    let error = match error {
        "normal" => ErrorDist::Normal { sigma },
        "laplace" => ErrorDist::Laplace { scale: sigma },
        "uniform" => ErrorDist::Uniform { half_width: sigma },
        other => return Err(MdeError::new_err(format!("unknown error law {other:?}"))),
    };
    let inner = mde_core::simulate(n, p, &beta, error, seed).map_err(to_py)?;
    Ok(PyRegressionData { inner })
}

#[pymodule]
pub fn mde(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MdeError", m.py().get_type::<MdeError>())?;
    m.add_class::<PyRegressionData>()?;
    m.add_class::<PyFitResult>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(nelder_mead_fit, m)?)?;
    m.add_function(wrap_pyfunction!(loss, m)?)?;
    m.add_function(wrap_pyfunction!(loss_by_integration, m)?)?;
    m.add_function(wrap_pyfunction!(coordinate_update, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_coordinate_min, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
