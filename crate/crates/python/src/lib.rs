//! Python bindings: convergence sweeps, case labels and mesh generation.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use curved_hdg::analysis::{self, ErrorReport, FitMode, CASE_LABELS};
use curved_hdg::cli::{cmd_mesh, GEOMETRIES};
use curved_hdg::hdg::SolverKind;
use curved_hdg::mesh::{mesh_to_string, Mesh};
use curved_hdg::paths::PathStrategy;
use curved_hdg::run::{run_convergence, LevelOptions};
use curved_hdg::Error;

fn to_py(e: Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// One row per level: `(k, h, e_u, e_q, e_uhat, e_ustar)`.
pub type Row = (usize, f64, f64, f64, f64, f64);

pub fn sweep(
    case: &str,
    k: usize,
    levels: &[usize],
    fit: Option<&str>,
    paths: Option<&str>,
    solver: &str,
) -> curved_hdg::Result<ErrorReport> {
    let c = analysis::case(case)?;
    let mut opts = LevelOptions::for_case(&c, k);
    if let Some(f) = fit {
        opts.fit = f.parse::<FitMode>()?;
    }
    if let Some(p) = paths {
        opts.paths = p.parse::<PathStrategy>()?;
    }
    opts.solver = solver.parse::<SolverKind>()?;
    if k > 3 || levels.is_empty() {
        return Err(Error::Config(format!(
            "need k <= 3 and at least one level, got k={k}"
        )));
    }
    run_convergence(&c, levels, &opts, &mut std::io::sink())
}

pub fn rows(report: &ErrorReport) -> Vec<Row> {
    report
        .rows
        .iter()
        .map(|r| (report.k, r.h, r.e_u, r.e_q, r.e_uhat, r.e_ustar))
        .collect()
}

/// Vertex coordinates and triangle vertex indices.
pub type MeshArrays = (Vec<(f64, f64)>, Vec<(usize, usize, usize)>);

pub fn mesh_arrays(mesh: &Mesh) -> MeshArrays {
    let v = mesh.vertices.iter().map(|p| (p.x, p.y)).collect();
    let t = mesh.triangles.iter().map(|t| (t[0], t[1], t[2])).collect();
    (v, t)
}

#[pyfunction]
fn case_labels() -> Vec<&'static str> {
    CASE_LABELS.to_vec()
}

#[pyfunction]
fn geometries() -> Vec<&'static str> {
    GEOMETRIES.iter().map(|g| g.0).collect()
}

/// Error rows of a refinement sweep.
#[pyfunction]
#[pyo3(signature = (case, k, levels, fit=None, paths=None, solver="condensed"))]
fn convergence(
    py: Python<'_>,
    case: &str,
    k: usize,
    levels: Vec<usize>,
    fit: Option<&str>,
    paths: Option<&str>,
    solver: &str,
) -> PyResult<Vec<Row>> {
    py.detach(|| sweep(case, k, &levels, fit, paths, solver))
        .map(|r| rows(&r))
        .map_err(to_py)
}

/// Same sweep as `convergence`, formatted like `report.csv`.
#[pyfunction]
#[pyo3(signature = (case, k, levels, fit=None, paths=None, solver="condensed"))]
fn convergence_csv(
    py: Python<'_>,
    case: &str,
    k: usize,
    levels: Vec<usize>,
    fit: Option<&str>,
    paths: Option<&str>,
    solver: &str,
) -> PyResult<String> {
    py.detach(|| sweep(case, k, &levels, fit, paths, solver))
        .map(|r| r.to_csv())
        .map_err(to_py)
}

#[pyfunction]
fn eoc(h: Vec<f64>, e: Vec<f64>) -> PyResult<Vec<Option<f64>>> {
    if h.len() != e.len() {
        return Err(PyValueError::new_err("h and e differ in length"));
    }
    Ok(analysis::eoc(&h, &e))
}

/// `(vertices, triangles)` of a generated mesh.
#[pyfunction]
#[pyo3(signature = (geometry, n, fit="interpolated"))]
fn generate_mesh(geometry: &str, n: usize, fit: &str) -> PyResult<MeshArrays> {
    let fit: FitMode = fit.parse().map_err(to_py)?;
    cmd_mesh(geometry, n, fit)
        .map(|m| mesh_arrays(&m))
        .map_err(to_py)
}

/// Mesh file text as written by `curved-hdg mesh`.
#[pyfunction]
#[pyo3(signature = (geometry, n, fit="interpolated"))]
fn mesh_text(geometry: &str, n: usize, fit: &str) -> PyResult<String> {
    let fit: FitMode = fit.parse().map_err(to_py)?;
    cmd_mesh(geometry, n, fit)
        .map(|m| mesh_to_string(&m))
        .map_err(to_py)
}

#[pymodule]
fn curved_hdg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CSV_HEADER", analysis::CSV_HEADER)?;
    m.add_function(wrap_pyfunction!(case_labels, m)?)?;
    m.add_function(wrap_pyfunction!(geometries, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_csv, m)?)?;
    m.add_function(wrap_pyfunction!(eoc, m)?)?;
    m.add_function(wrap_pyfunction!(generate_mesh, m)?)?;
    m.add_function(wrap_pyfunction!(mesh_text, m)?)?;
    Ok(())
}
