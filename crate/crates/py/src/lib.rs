//! Python bindings for `mourre-lab`.
//!
//! Combinations and threshold solutions are exposed as classes; reports,
//! catalogs and other structured results are returned as plain Python
//! objects decoded from their JSON form.

use mourre_lab::catalog as cat;
use mourre_lab::chebyshev;
use mourre_lab::interpolation as interp;
use mourre_lab::pingpong as pp;
use mourre_lab::symbol as sym;
use mourre_lab::verifier as ver;
use mourre_lab::MourreError;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

create_exception!(mourre_lab, MourreLabError, PyException);

const SOLVER_TOL: f64 = 1e-13;

fn err(e: MourreError) -> PyErr {
    MourreLabError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    MourreLabError::new_err(format!("json: {e}"))
}

/// Converts a serializable value into Python objects through `json.loads`.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(json_err)?;
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

/// A weighted sum `Σ ρ_j A_{jκ}` of conjugate operators.
#[pyclass(name = "Combination", module = "mourre_lab", frozen)]
struct PyCombination(sym::Combination);

#[pymethods]
impl PyCombination {
    /// Builds a combination from `(j, rho)` pairs. With `normalized=True`
    /// (the default) the first term must be `(1, 1.0)`.
    #[new]
    #[pyo3(signature = (kappa, terms, normalized = true))]
    fn new(kappa: u32, terms: Vec<(u32, f64)>, normalized: bool) -> PyResult<Self> {
        let c = if normalized {
            sym::Combination::new(kappa, terms)
        } else {
            sym::Combination::unnormalized(kappa, terms)
        };
        c.map(Self).map_err(err)
    }

    #[getter]
    fn kappa(&self) -> u32 {
        self.0.kappa()
    }

    #[getter]
    fn sigma(&self) -> Vec<u32> {
        self.0.sigma()
    }

    #[getter]
    fn rho(&self) -> Vec<f64> {
        self.0.rho()
    }

    /// `G_κ^E(x)` in dimension 2.
    fn eval2(&self, e: f64, x: f64) -> PyResult<f64> {
        Ok(self.0.eval2(&sym::EnergyPoint2D::new(e, x).map_err(err)?))
    }

    /// `G_κ^E(x, y)` in dimension 3.
    fn eval3(&self, e: f64, x: f64, y: f64) -> PyResult<f64> {
        Ok(self.0.eval3(&sym::EnergyPoint3D::new(e, x, y).map_err(err)?))
    }

    /// `d/dx G_κ^E(x)` in dimension 2.
    fn deriv2(&self, e: f64, x: f64) -> PyResult<f64> {
        Ok(self.0.deriv2(&sym::EnergyPoint2D::new(e, x).map_err(err)?))
    }

    /// The combination multiplied by `t`.
    fn scaled(&self, t: f64) -> PyResult<Self> {
        self.0.scaled(t).map(Self).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(json_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(json_err)
    }

    fn __repr__(&self) -> String {
        format!("Combination(kappa={}, terms={:?})", self.0.kappa(), self.0.terms())
    }
}

/// A solved threshold energy with its chain and ω-weights.
#[pyclass(name = "ThresholdSolution", module = "mourre_lab", frozen)]
struct PyThresholdSolution(pp::ThresholdSolution);

#[pymethods]
impl PyThresholdSolution {
    #[getter]
    fn kappa(&self) -> u32 {
        self.0.kappa
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn variant(&self) -> String {
        self.0.variant.to_string()
    }

    #[getter(E)]
    fn energy(&self) -> f64 {
        self.0.e
    }

    #[getter(X)]
    fn chain(&self) -> Vec<f64> {
        self.0.x.clone()
    }

    #[getter]
    fn omega(&self) -> Vec<f64> {
        self.0.omega.clone()
    }

    #[getter]
    fn order_m(&self) -> usize {
        self.0.order_m
    }

    /// Residual of the ω-weighted linear relation for `j ≤ jmax`.
    #[pyo3(signature = (jmax = 8))]
    fn linear_relation_residual(&self, jmax: u32) -> f64 {
        pp::verify_linear_relation(&self.0, jmax)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(json_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "ThresholdSolution(kappa={}, variant={}, n={}, E={})",
            self.0.kappa, self.0.variant, self.0.n, self.0.e
        )
    }
}

fn variant(name: &str) -> PyResult<pp::Variant> {
    name.parse().map_err(err)
}

fn threshold(kappa: u32, n: usize, name: &str) -> PyResult<pp::ThresholdSolution> {
    let v = variant(name)?;
    if n == 0 {
        return pp::ThresholdSolution::zeroth_order(kappa, v).map_err(err);
    }
    pp::PingPongProblem::new(kappa, n, v)
        .and_then(|p| pp::solve(&p, SOLVER_TOL))
        .map_err(err)
}

/// `T_n(x)`.
#[pyfunction]
fn eval_t(n: u32, x: f64) -> f64 {
    chebyshev::eval_t(n, x)
}

/// `U_{n-1}(x)`.
#[pyfunction]
fn eval_u(n: u32, x: f64) -> f64 {
    chebyshev::eval_u(n, x)
}

/// Threshold of depth `n` for a variant name (`j2`, `f`, `g`,
/// `well-dec(j)`, `well-inc(j)`); `n = 0` gives the zeroth-order anchor.
#[pyfunction]
#[pyo3(signature = (kappa, n, variant = "j2"))]
fn solve_threshold(kappa: u32, n: usize, variant: &str) -> PyResult<PyThresholdSolution> {
    threshold(kappa, n, variant).map(PyThresholdSolution)
}

/// Thresholds for `n = 1..=n_max`.
#[pyfunction]
#[pyo3(signature = (kappa, n_max, variant = "j2"))]
fn sequence(kappa: u32, n_max: usize, variant: &str) -> PyResult<Vec<PyThresholdSolution>> {
    let sols = pp::sequence(kappa, self::variant(variant)?, n_max, SOLVER_TOL).map_err(err)?;
    Ok(sols.into_iter().map(PyThresholdSolution).collect())
}

/// Merged threshold catalog as a dict with `entries` and `diagnostics`.
#[pyfunction]
#[pyo3(signature = (kappa, dim = 2, n_max = 4))]
fn build_catalog(py: Python<'_>, kappa: u32, dim: u32, n_max: usize) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &cat::build_catalog(kappa, dim, n_max).map_err(err)?)
}

/// Coefficients for the band between two thresholds. Returns the solved
/// combination and the full report as a dict.
#[pyfunction]
fn solve_coefficients<'py>(
    py: Python<'py>,
    left: &PyThresholdSolution,
    right: &PyThresholdSolution,
    sigma: Vec<u32>,
) -> PyResult<(PyCombination, Bound<'py, PyAny>)> {
    let p = interp::InterpolationProblem::new(left.0.clone(), right.0.clone(), sigma).map_err(err)?;
    let report = interp::solve_coefficients(&p).map_err(err)?;
    Ok((PyCombination(report.combination.clone()), to_py(py, &report)?))
}

/// Scans `G` over the open band `(lo, hi)` and returns the report as a dict.
/// With `certify=True` a non-positive interior value raises.
#[pyfunction]
#[pyo3(signature = (combination, lo, hi, e_samples = 256, x_samples = 512, certify = true))]
fn scan_band<'py>(
    py: Python<'py>,
    combination: &PyCombination,
    lo: f64,
    hi: f64,
    e_samples: usize,
    x_samples: usize,
    certify: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let config = ver::ScanConfig {
        e_samples,
        x_samples,
        ..ver::ScanConfig::default()
    };
    let report = if certify {
        ver::certify_band(&combination.0, (lo, hi), &config)
    } else {
        ver::scan_band(&combination.0, (lo, hi), &config)
    }
    .map_err(err)?;
    to_py(py, &report)
}

/// Log-log convergence study of the J2 sequence as a dict.
#[pyfunction]
#[pyo3(signature = (kappa, n_max = 400))]
fn convergence_study(py: Python<'_>, kappa: u32, n_max: usize) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &ver::convergence_study(kappa, n_max).map_err(err)?)
}

#[pymodule]
#[pyo3(name = "mourre_lab")]
fn mourre_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MourreLabError", m.py().get_type::<MourreLabError>())?;
    m.add_class::<PyCombination>()?;
    m.add_class::<PyThresholdSolution>()?;
    m.add_function(wrap_pyfunction!(eval_t, m)?)?;
    m.add_function(wrap_pyfunction!(eval_u, m)?)?;
    m.add_function(wrap_pyfunction!(solve_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(sequence, m)?)?;
    m.add_function(wrap_pyfunction!(build_catalog, m)?)?;
    m.add_function(wrap_pyfunction!(solve_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(scan_band, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_study, m)?)?;
    Ok(())
}
