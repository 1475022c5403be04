use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use fskyrme_core::config::{make_initializer, parse_config, RunConfig};
use fskyrme_core::energy;
use fskyrme_core::error::Error;
use fskyrme_core::identities;
use fskyrme_core::run::Command;
use fskyrme_core::snapshot::{self, FieldSnapshot};
use fskyrme_core::topology::{self, HopfMethod};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::InvalidGrid(_) | Error::InvalidFlowConfig(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn config(text: &str) -> PyResult<RunConfig> {
    parse_config(text).map_err(to_py)
}

fn command(name: &str) -> PyResult<Command> {
    Ok(match name {
        "minimize" => Command::Minimize,
        "invariants" => Command::Invariants,
        "identities" => Command::Identities,
        "convergence" => Command::Convergence,
        _ => return Err(PyValueError::new_err(format!("unknown subcommand `{name}`"))),
    })
}

/// Run a subcommand on a config text; returns `(passed, summary, files)`.
#[pyfunction]
fn run(subcommand: &str, config_text: &str, out_dir: PathBuf) -> PyResult<(bool, String, Vec<String>)> {
    let cfg = config(config_text)?;
    let o = fskyrme_core::run::run(command(subcommand)?, &cfg, &out_dir).map_err(to_py)?;
    let files = o.files.iter().map(|p| p.display().to_string()).collect();
    Ok((o.passed, o.summary, files))
}

/// `(dirichlet, skyrme, total)` of the configured initial field.
#[pyfunction]
fn initial_energy(config_text: &str) -> PyResult<(f64, f64, f64)> {
    let cfg = config(config_text)?;
    let m = make_initializer(&cfg).map_err(to_py)?;
    let e = energy::energy_map_weighted(&m, cfg.flow.skyrme_weight);
    Ok((e.dirichlet, e.skyrme, e.total))
}

/// Degree (su2) or Hopf number (s2) of the configured initial field.
#[pyfunction]
#[pyo3(signature = (config_text, method = "poisson"))]
fn initial_invariant(config_text: &str, method: &str) -> PyResult<f64> {
    let cfg = config(config_text)?;
    let method = match method {
        "poisson" => HopfMethod::PoissonGauge,
        "lift" => HopfMethod::LiftCS,
        _ => return Err(PyValueError::new_err(format!("unknown method `{method}`"))),
    };
    let m = make_initializer(&cfg).map_err(to_py)?;
    let r = topology::invariant_report(&m, method).map_err(to_py)?;
    r.secondary_raw()
        .ok_or_else(|| PyRuntimeError::new_err("fluxes are nonzero; no secondary invariant"))
}

/// Snapshot header fields plus the flat site values under `values`.
#[pyfunction]
fn read_snapshot<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyDict>> {
    let snap = FieldSnapshot::read(&path).map_err(to_py)?;
    let f = &snap.field;
    let c = snapshot::components(f.target());
    let values: Vec<f64> = f
        .values()
        .iter()
        .flat_map(|q| q.to_array()[4 - c..].to_vec())
        .collect();
    let d = PyDict::new(py);
    d.set_item("target", f.target().name())?;
    d.set_item("n", f.grid().n())?;
    d.set_item("box_length", f.grid().box_length())?;
    d.set_item("boundary_mode", f.grid().boundary().as_str())?;
    d.set_item("iteration", snap.iteration)?;
    d.set_item("energy", snap.energy)?;
    d.set_item("components", c)?;
    d.set_item("values", values)?;
    Ok(d)
}

/// Rendered identity table at `n` and `2n`, and whether every row passed.
#[pyfunction]
#[pyo3(signature = (n, samples = 8, seed = 0))]
fn identity_table(n: usize, samples: usize, seed: u64) -> PyResult<(bool, String)> {
    let t = identities::identity_table(n, samples, seed).map_err(to_py)?;
    Ok((t.all_pass(), t.render()))
}

#[pymodule]
fn fskyrme(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(initial_energy, m)?)?;
    m.add_function(wrap_pyfunction!(initial_invariant, m)?)?;
    m.add_function(wrap_pyfunction!(read_snapshot, m)?)?;
    m.add_function(wrap_pyfunction!(identity_table, m)?)?;
    Ok(())
}
