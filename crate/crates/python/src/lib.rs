//! Python bindings: thin wrappers returning plain floats, complex numbers,
//! lists and dicts.

use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use spinboson::kernels::CorrelationFunction;
use spinboson::scenario::{self, Scenario};
use spinboson::{
    perturbation, special, volterra, Error, ExpSumKernel, LorentzMode, PoleExpansion, SinglePeak,
    TimeGrid, TstarMode,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::InvalidParameter { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn kernel(modes: Vec<(f64, f64, f64)>) -> PyResult<ExpSumKernel> {
    let modes = modes
        .into_iter()
        .map(|(g, gamma, dw)| LorentzMode::new(g, gamma, dw))
        .collect::<spinboson::Result<Vec<_>>>()
        .map_err(to_py)?;
    ExpSumKernel::new(modes).map_err(to_py)
}

/// Closed-form `x(t; lambda)` for a single resonant peak.
#[pyfunction]
fn closed_form_x(g: f64, gamma: f64, lam: f64, t: f64) -> PyResult<Complex64> {
    volterra::closed_form_single_peak(g, gamma, lam, t).map_err(to_py)
}

/// Exact `x` on a uniform grid for Lorentz modes `[(g, gamma, dw), ...]`.
#[pyfunction]
fn solve_expsum(
    modes: Vec<(f64, f64, f64)>,
    lam: f64,
    t_max: f64,
    n_points: usize,
) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
    let grid = TimeGrid::uniform(t_max, n_points).map_err(to_py)?;
    let traj = volterra::solve_expsum(&kernel(modes)?, lam, &grid).map_err(to_py)?;
    Ok((traj.times, traj.values))
}

/// Moments `G~_0 .. G~_n`.
#[pyfunction]
fn moments(modes: Vec<(f64, f64, f64)>, n: usize) -> PyResult<Vec<Complex64>> {
    Ok(kernel(modes)?
        .moments(n)
        .map_err(to_py)?
        .as_slice()
        .to_vec())
}

/// Coefficients `(p~_0..p~_n, r_0..r_n)`.
#[pyfunction]
fn pole_residue_series(
    modes: Vec<(f64, f64, f64)>,
    n: usize,
) -> PyResult<(Vec<Complex64>, Vec<Complex64>)> {
    let m = kernel(modes)?.moments(n).map_err(to_py)?;
    let e = PoleExpansion::compute(&m, n).map_err(to_py)?;
    Ok((e.p_terms, e.r_terms))
}

/// Initial-layer size `(asymptotic, exact)` of a single resonant peak; the
/// exact value uses the closed-form residue and pole, `0.0` when `|r| <= 1`.
#[pyfunction]
fn tstar(g: f64, gamma: f64, lam: f64) -> PyResult<(f64, f64)> {
    let k = ExpSumKernel::single(g, gamma, 0.0).map_err(to_py)?;
    let e = PoleExpansion::compute(&k.moments(1).map_err(to_py)?, 1).map_err(to_py)?;
    let asym = perturbation::initial_layer_tstar(&e, lam, TstarMode::Asymptotic)
        .map_err(to_py)?
        .unwrap_or(0.0);
    let form = SinglePeak::new(g, gamma)
        .map_err(to_py)?
        .exponential_form(lam);
    let exact = form.tstar().map_err(to_py)?.unwrap_or(0.0);
    Ok((asym, exact))
}

#[pyfunction]
fn dawson(x: f64) -> f64 {
    special::dawson(x)
}

/// Run a scenario given as TOML text (or a preset name) in memory; returns
/// one dict per coupling mapping file names to contents.
#[pyfunction]
#[pyo3(signature = (toml_text=None, preset=None))]
fn run_scenario(
    toml_text: Option<&str>,
    preset: Option<&str>,
) -> PyResult<Vec<BTreeMap<String, String>>> {
    let s = match (toml_text, preset) {
        (Some(text), None) => Scenario::from_toml_str(text),
        (None, Some(name)) => scenario::preset(name),
        _ => {
            return Err(PyValueError::new_err(
                "pass exactly one of toml_text, preset",
            ))
        }
    }
    .map_err(to_py)?;
    let outputs = scenario::compute(&s).map_err(to_py)?;
    Ok(outputs
        .into_iter()
        .map(|o| {
            let mut files: BTreeMap<String, String> = o
                .tables
                .iter()
                .map(|t| (t.file_name(), t.to_csv()))
                .collect();
            files.insert("manifest.txt".into(), o.manifest.to_string());
            files
        })
        .collect())
}

#[pymodule]
fn spinboson_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(closed_form_x, m)?)?;
    m.add_function(wrap_pyfunction!(solve_expsum, m)?)?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(pole_residue_series, m)?)?;
    m.add_function(wrap_pyfunction!(tstar, m)?)?;
    m.add_function(wrap_pyfunction!(dawson, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
