//! Commands behind the `curved-hdg` binary.

pub mod config;
pub mod vtk;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

pub use config::{parse_key_values, RunConfig};

use crate::analysis::{case, ErrorReport, FitMode, ManufacturedCase, CSV_HEADER};
use crate::error::{Error, Result};
use crate::mesh::{write_mesh, Mesh};
use crate::run::{load_mesh, run_on_mesh, sweep, write_level_log, MeshSource};

/// Named geometries of the `mesh` command and the case whose domain they use.
pub const GEOMETRIES: [(&str, &str); 8] = [
    ("square", "ex1"),
    ("wide-annulus", "ex2"),
    ("ring", "ex3"),
    ("annulus", "ex4"),
    ("airfoil", "ex5a"),
    ("ellipse", "ex6"),
    ("kidney", "ex7"),
    ("circle", "ex8"),
];

fn open_log(cfg: &RunConfig) -> Result<BufWriter<File>> {
    fs::create_dir_all(&cfg.out)?;
    Ok(BufWriter::new(File::create(cfg.out.join("run.log"))?))
}

fn source(cfg: &RunConfig) -> MeshSource<'_> {
    if cfg.mesh_files.is_empty() {
        MeshSource::Generated
    } else {
        MeshSource::Files(&cfg.mesh_files)
    }
}

/// Refinement sweep for every configured degree. Writes `report.csv` (rows
/// of all solved levels, even after a failure) and `run.log` into `cfg.out`.
pub fn cmd_convergence(cfg: &RunConfig) -> Result<Vec<ErrorReport>> {
    let case = cfg.manufactured_case()?;
    let mut log = open_log(cfg)?;
    writeln!(
        log,
        "case={} degrees={:?} levels={:?} paths={:?} fit={:?} solver={:?} tol={:e}",
        case.label, cfg.degrees, cfg.levels, cfg.paths, cfg.fit, cfg.solver, cfg.tol
    )?;
    let mut reports = Vec::new();
    let mut failure = None;
    for &k in &cfg.degrees {
        let mut report = ErrorReport::new(k);
        let result = sweep(
            &case,
            &cfg.levels,
            source(cfg),
            &cfg.level_options(k),
            &mut log,
            &mut report,
        );
        reports.push(report);
        if let Err(e) = result {
            failure = Some(e);
            break;
        }
    }
    let mut csv = format!("{CSV_HEADER}\n");
    for r in &reports {
        csv.push_str(&r.csv_rows());
    }
    fs::write(cfg.out.join("report.csv"), csv)?;
    log.flush()?;
    match failure {
        Some(e) => Err(e),
        None => Ok(reports),
    }
}

fn level_mesh(cfg: &RunConfig, case: &ManufacturedCase, level: usize) -> Result<Mesh> {
    if cfg.mesh_files.is_empty() {
        return case.build_mesh(cfg.fit, level);
    }
    let i = cfg.levels.iter().position(|&l| l == level).ok_or_else(|| {
        Error::Config(format!("level {level} is not among the configured levels"))
    })?;
    load_mesh(case, &cfg.mesh_files[i])
}

/// Solves one level for every configured degree and writes one VTK file per
/// degree; `level` defaults to the first configured level.
pub fn cmd_solve(cfg: &RunConfig, level: Option<usize>) -> Result<Vec<PathBuf>> {
    let case = cfg.manufactured_case()?;
    let level = level.unwrap_or(cfg.levels[0]);
    let mut log = open_log(cfg)?;
    let mut files = Vec::new();
    for &k in &cfg.degrees {
        let result = level_mesh(cfg, &case, level)
            .and_then(|m| run_on_mesh(&case, m, level, &cfg.level_options(k)));
        let out = match result {
            Ok(out) => out,
            Err(e) => {
                writeln!(log, "case={} k={k} level={level} error: {e}", case.label)?;
                log.flush()?;
                return Err(e);
            }
        };
        write_level_log(&mut log, &case, k, &out)?;
        let path = cfg
            .out
            .join(format!("{}_k{k}_level{level}.vtk", case.label));
        let title = format!("{} k={k} level={level} h={:.6e}", case.label, out.row.h);
        vtk::write_vtk(&path, &out.mesh, &out.solution, &out.post, &title)?;
        files.push(path);
    }
    log.flush()?;
    Ok(files)
}

/// Builds the mesh of a named geometry (or of a case label) at subdivision `n`.
pub fn cmd_mesh(geometry: &str, n: usize, fit: FitMode) -> Result<Mesh> {
    let label = GEOMETRIES
        .iter()
        .find(|(g, l)| *g == geometry || *l == geometry)
        .map(|(_, l)| *l)
        .ok_or_else(|| {
            let names: Vec<&str> = GEOMETRIES.iter().map(|(g, _)| *g).collect();
            Error::Config(format!(
                "unknown geometry '{geometry}' (expected one of {})",
                names.join(", ")
            ))
        })?;
    case(label)?.build_mesh(fit, n)
}

pub fn write_mesh_file(mesh: &Mesh, path: &std::path::Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_mesh(mesh, path)
}
