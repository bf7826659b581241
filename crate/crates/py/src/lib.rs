//! Python module `qhdrelax`: runs experiments from TOML text and exposes a
//! few spectral and diagnostic helpers on plain lists.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ::qhdrelax::experiments::{self, ExperimentConfig};
use ::qhdrelax::{diagnostics, Error, Grid};

fn to_py(err: Error) -> PyErr {
    if err.is_solver_failure() {
        PyRuntimeError::new_err(err.to_string())
    } else {
        PyValueError::new_err(err.to_string())
    }
}

/// Runs the experiment described by `config` (TOML text). Returns the
/// summary as JSON text and a dict of output file contents. When `out` is
/// given the files are also written there.
#[pyfunction]
#[pyo3(signature = (config, out=None))]
fn run_experiment(py: Python<'_>, config: &str, out: Option<PathBuf>) -> PyResult<(String, Vec<(String, String)>)> {
    let cfg = ExperimentConfig::from_toml(config).map_err(to_py)?;
    let study = py.allow_threads(|| experiments::run(&cfg)).map_err(to_py)?;
    if let Some(dir) = out {
        study.write(&dir).map_err(to_py)?;
    }
    Ok((study.summary_json(), study.files))
}

/// SHA-256 of the canonical config echo.
#[pyfunction]
fn config_hash(config: &str) -> PyResult<String> {
    ExperimentConfig::from_toml(config).and_then(|c| c.hash()).map_err(to_py)
}

/// Spectral derivative of periodic samples on the unit torus.
#[pyfunction]
fn deriv(values: Vec<f64>, order: u32) -> PyResult<Vec<f64>> {
    let grid = Grid::new(values.len()).map_err(to_py)?;
    Ok(grid.deriv(&values, order))
}

/// `∫ρ log(ρ/M)` for a positive density.
#[pyfunction]
fn entropy(rho: Vec<f64>) -> PyResult<f64> {
    let grid = Grid::new(rho.len()).map_err(to_py)?;
    diagnostics::entropy(&grid, &rho).map_err(to_py)
}

#[pyfunction]
fn tau0_heuristic(c1: f64, e0: f64, m0: f64) -> f64 {
    experiments::tau0_heuristic(c1, e0, m0)
}

#[pymodule]
#[pyo3(name = "qhdrelax")]
fn qhdrelax_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(config_hash, m)?)?;
    m.add_function(wrap_pyfunction!(deriv, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(tau0_heuristic, m)?)?;
    Ok(())
}
