//! Single-level pipeline and refinement sweeps.

use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;

use crate::analysis::{
    error_norms, interface_error_norms, ErrorReport, FitMode, ManufacturedCase, NormRow,
};
use crate::error::Result;
use crate::hdg::{
    self, local_conservation, ConservationReport, FieldSolution, HdgOptions, SolverKind,
};
use crate::mesh::{read_mesh, Mesh};
use crate::paths::{build_paths, validate_paths, PathDiagnostics, PathFamily, PathStrategy};
use crate::postprocess::{postprocess, PostprocessedField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelOptions {
    pub k: usize,
    pub fit: FitMode,
    pub paths: PathStrategy,
    pub solver: SolverKind,
    pub tol: f64,
    pub tau_scale: f64,
}

impl LevelOptions {
    /// The case's default fit and path strategy.
    pub fn for_case(case: &ManufacturedCase, k: usize) -> Self {
        LevelOptions {
            k,
            fit: case.default_fit,
            paths: case.default_paths,
            solver: SolverKind::Condensed,
            tol: 1e-10,
            tau_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LevelOutput {
    pub level: usize,
    pub mesh: Mesh,
    pub paths: PathFamily,
    pub diagnostics: PathDiagnostics,
    pub solution: FieldSolution,
    pub post: PostprocessedField,
    pub row: NormRow,
    pub conservation: ConservationReport,
}

pub fn run_level(
    case: &ManufacturedCase,
    level: usize,
    opts: &LevelOptions,
) -> Result<LevelOutput> {
    let mesh = case.build_mesh(opts.fit, level)?;
    run_on_mesh(case, mesh, level, opts)
}

pub fn run_on_mesh(
    case: &ManufacturedCase,
    mesh: Mesh,
    level: usize,
    opts: &LevelOptions,
) -> Result<LevelOutput> {
    let paths = build_paths(&mesh, &case.domain, opts.paths, opts.k)?;
    let diagnostics = validate_paths(&paths, &mesh, &case.domain);
    let hopts = HdgOptions {
        k: opts.k,
        tau_scale: opts.tau_scale,
        solver: opts.solver,
        tol: opts.tol,
    };
    let solution = hdg::solve_problem(&mesh, &case.domain, &paths, case, &hopts)?;
    let post = postprocess(&solution, &mesh, &case.domain)?;
    let row = if case.has_interface() {
        interface_error_norms(&solution, &post, case, &mesh)
    } else {
        error_norms(&solution, &post, case, &mesh)
    };
    let conservation = local_conservation(&solution, &mesh, case);
    info!(
        "{} k={} level={} triangles={} h={:.4e} e_u={:.3e}",
        case.label,
        opts.k,
        level,
        mesh.num_triangles(),
        row.h,
        row.e_u
    );
    Ok(LevelOutput {
        level,
        mesh,
        paths,
        diagnostics,
        solution,
        post,
        row,
        conservation,
    })
}

/// Where the meshes of a sweep come from.
#[derive(Debug, Clone, Copy)]
pub enum MeshSource<'a> {
    /// The case's built-in generator, one mesh per level.
    Generated,
    /// One file per level, classified against the case geometry.
    Files(&'a [PathBuf]),
}

pub fn load_mesh(case: &ManufacturedCase, path: &Path) -> Result<Mesh> {
    let mut mesh = read_mesh(path)?;
    mesh.classify(&case.domain)?;
    Ok(mesh)
}

pub fn write_level_log(
    log: &mut dyn Write,
    case: &ManufacturedCase,
    k: usize,
    out: &LevelOutput,
) -> Result<()> {
    let d = &out.diagnostics;
    writeln!(
        log,
        "case={} k={} level={} triangles={} edges={} h={:.6e}",
        case.label,
        k,
        out.level,
        out.mesh.num_triangles(),
        out.mesh.num_edges(),
        out.row.h
    )?;
    writeln!(
        log,
        "  paths: count={} max_ratio={:.4} long={} crossings={} wrong_region={} warnings={}",
        d.num_paths,
        d.max_ratio,
        d.long_paths,
        d.crossings,
        d.wrong_region,
        out.paths.warnings.len()
    )?;
    for w in &out.paths.warnings {
        writeln!(log, "  warning: {w}")?;
    }
    writeln!(
        log,
        "  solve: residual={:.3e} conservation_standard={:.3e} conservation_other={:.3e}",
        out.solution.residual,
        out.conservation.max_standard(),
        out.conservation.max_other()
    )?;
    writeln!(
        log,
        "  errors: e_u={:.6e} e_q={:.6e} e_uhat={:.6e} e_ustar={:.6e}",
        out.row.e_u, out.row.e_q, out.row.e_uhat, out.row.e_ustar
    )?;
    Ok(())
}

/// Runs the levels in order, appending one row per solved level to `report`
/// and one log block per level; stops at the first failing level.
pub fn sweep(
    case: &ManufacturedCase,
    levels: &[usize],
    source: MeshSource<'_>,
    opts: &LevelOptions,
    log: &mut dyn Write,
    report: &mut ErrorReport,
) -> Result<()> {
    for (i, &level) in levels.iter().enumerate() {
        let mesh = match source {
            MeshSource::Generated => case.build_mesh(opts.fit, level),
            MeshSource::Files(files) => load_mesh(case, &files[i]),
        };
        let out = match mesh.and_then(|m| run_on_mesh(case, m, level, opts)) {
            Ok(out) => out,
            Err(e) => {
                writeln!(
                    log,
                    "case={} k={} level={level} error: {e}",
                    case.label, opts.k
                )?;
                return Err(e);
            }
        };
        write_level_log(log, case, opts.k, &out)?;
        report.rows.push(out.row);
    }
    let finite = |o: &[Option<f64>]| o.last().copied().flatten();
    if let (Some(ou), Some(oq)) = (finite(&report.orders_u()), finite(&report.orders_q())) {
        writeln!(
            log,
            "case={} k={} final orders: u={ou:.3} q={oq:.3}",
            case.label, opts.k
        )?;
    }
    Ok(())
}

/// Generated-mesh sweep over `levels`.
pub fn run_convergence(
    case: &ManufacturedCase,
    levels: &[usize],
    opts: &LevelOptions,
    log: &mut dyn Write,
) -> Result<ErrorReport> {
    let mut report = ErrorReport::new(opts.k);
    sweep(case, levels, MeshSource::Generated, opts, log, &mut report)?;
    Ok(report)
}
