//! Python bindings: the scenario runner and the main solver entry points.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use stefan_core::cli::{self, CliError, ScenarioConfig};
use stefan_core::error::StefanError;
use stefan_core::fixedpoint::FixedPointConfig;
use stefan_core::freeboundary::solve_front as core_solve_front;
use stefan_core::oracle::{shoot as core_shoot, ShootingConfig};
use stefan_core::profile::ProfileFunction;
use stefan_core::thermal::{CoefficientModel, DimensionlessProblem};
use stefan_core::vapor::positive_root;

create_exception!(stefan, ConfigError, PyValueError);
create_exception!(stefan, SolverError, PyRuntimeError);

fn stefan_err(e: StefanError) -> PyErr {
    if e.is_solver_failure() {
        SolverError::new_err(e.to_string())
    } else {
        ConfigError::new_err(e.to_string())
    }
}

fn cli_err(e: CliError) -> PyErr {
    match e {
        CliError::Config(_) => ConfigError::new_err(e.to_string()),
        _ => SolverError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Builds the problem from keyword arguments: `qstar` and `m` select the heat-flux
/// condition, `pstar` and `ste` the convective one.
#[allow(clippy::too_many_arguments)]
fn problem(
    a: f64,
    alpha0: f64,
    nu: f64,
    qstar: Option<f64>,
    m: Option<f64>,
    pstar: Option<f64>,
    ste: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
) -> PyResult<DimensionlessProblem> {
    let model = match (alpha, beta) {
        (None, None) => CoefficientModel::Constant,
        (Some(al), Some(be)) => CoefficientModel::linear(al, be),
        _ => return Err(ConfigError::new_err("alpha and beta must be given together")),
    };
    match (qstar, m, pstar, ste) {
        (Some(q), Some(m), None, None) => DimensionlessProblem::heat_flux(a, alpha0, nu, q, m, model),
        (None, None, Some(p), Some(s)) => DimensionlessProblem::convective(a, alpha0, nu, p, s, model),
        _ => return Err(ConfigError::new_err("give either (qstar, m) or (pstar, ste)")),
    }
    .map_err(stefan_err)
}

fn profile_dict<'py>(py: Python<'py>, u: &ProfileFunction) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("eta", u.grid().to_vec())?;
    d.set_item("u", u.values().to_vec())?;
    Ok(d)
}

/// Runs a scenario given as a JSON document and returns
/// `{"summary": ..., "profile": ..., "comparison": ...}`.
#[pyfunction]
#[pyo3(signature = (config_json, threads = 1))]
fn run_scenario<'py>(py: Python<'py>, config_json: &str, threads: usize) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ScenarioConfig::from_json(config_json).map_err(cli_err)?;
    let out = py.detach(|| cli::execute(&cfg, threads.max(1))).map_err(cli_err)?;
    let doc = serde_json::json!({
        "summary": out.summary.to_value(),
        "profile": out.profile,
        "comparison": out.comparison,
    });
    json_to_py(py, &doc)
}

/// Positive root of α² + dα + e = 0 and whether a second positive root was discarded.
#[pyfunction]
fn vapor_root(d: f64, e: f64) -> PyResult<(f64, bool)> {
    positive_root(d, e).map_err(stefan_err)
}

/// Melt-front coefficient ξ and the liquid-zone profile.
#[pyfunction]
#[pyo3(signature = (a, alpha0, nu, *, qstar = None, m = None, pstar = None, ste = None, alpha = None, beta = None))]
#[allow(clippy::too_many_arguments)]
fn solve_front<'py>(
    py: Python<'py>,
    a: f64,
    alpha0: f64,
    nu: f64,
    qstar: Option<f64>,
    m: Option<f64>,
    pstar: Option<f64>,
    ste: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let p = problem(a, alpha0, nu, qstar, m, pstar, ste, alpha, beta)?;
    let report = py
        .detach(|| core_solve_front(&p, &FixedPointConfig::default()))
        .map_err(stefan_err)?;
    let d = profile_dict(py, &report.solution.profile)?;
    d.set_item("xi", report.xi)?;
    d.set_item("xi1", report.xi1)?;
    d.set_item("xi2", report.xi2)?;
    d.set_item("defect", report.defect)?;
    d.set_item("iterations", report.solution.iterations)?;
    d.set_item("admissible", report.admissible)?;
    d.set_item("warnings", report.warnings)?;
    Ok(d)
}

/// Independent shooting solution of the same problem.
#[pyfunction]
#[pyo3(signature = (a, alpha0, nu, *, qstar = None, m = None, pstar = None, ste = None, alpha = None, beta = None))]
#[allow(clippy::too_many_arguments)]
fn shoot<'py>(
    py: Python<'py>,
    a: f64,
    alpha0: f64,
    nu: f64,
    qstar: Option<f64>,
    m: Option<f64>,
    pstar: Option<f64>,
    ste: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let p = problem(a, alpha0, nu, qstar, m, pstar, ste, alpha, beta)?;
    let result = py
        .detach(|| core_shoot(&p, &ShootingConfig::default()))
        .map_err(stefan_err)?;
    let d = profile_dict(py, &result.profile)?;
    d.set_item("xi", result.xi)?;
    d.set_item("u_alpha0", result.u_alpha0)?;
    d.set_item("defect", result.defect)?;
    Ok(d)
}

#[pymodule]
fn stefan(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ConfigError", m.py().get_type::<ConfigError>())?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(vapor_root, m)?)?;
    m.add_function(wrap_pyfunction!(solve_front, m)?)?;
    m.add_function(wrap_pyfunction!(shoot, m)?)?;
    Ok(())
}
