//! Degree-`k` HDG discretization of `q + K∇u = 0`, `-∇·q = f` on a
//! straight-triangle mesh, with transferred Dirichlet data, extrapolated
//! Neumann data and curved-interface jump conditions.
//!
//! Unknowns are ordered per element as `(q_x, q_y, u)` blocks of length
//! `dim P^k`, followed by `k + 1` trace coefficients per edge.

mod assemble;
mod field;
mod solve;

use std::fmt;

use nalgebra::Matrix2;

use crate::basis::dim;
use crate::error::Result;
use crate::geometry::{DomainSpec, Point, Region};
use crate::mesh::Mesh;
use crate::paths::PathFamily;

pub use assemble::{assemble, EdgeBlock, ElementBlock, HdgSystem, InterfaceShift};
pub use field::{local_conservation, ConservationReport, FieldSolution};
pub use solve::{SolveReport, SparseSystem};

/// Data of a boundary-value or interface problem.
pub trait ProblemData {
    /// Right-hand side of `-∇·q = f`, extended from the branch of `region`.
    fn source(&self, region: Region, x: Point) -> f64;

    /// Dirichlet data at a point of the true boundary.
    fn dirichlet(&self, _x: Point) -> f64 {
        0.0
    }

    /// Prescribed `q·n` at a point of the true boundary with outward normal `n`.
    fn neumann(&self, _x: Point, _n: Point) -> f64 {
        0.0
    }

    /// Scalar jump `u¹ - u²` at a point of the interface.
    fn jump_value(&self, _x: Point) -> f64 {
        0.0
    }

    /// Flux jump `q¹·n¹ + q²·n²` at a point of the interface with normal `n¹`.
    fn jump_flux(&self, _x: Point, _n1: Point) -> f64 {
        0.0
    }
}

/// Per-element stabilization parameter `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stabilization {
    pub tau: Vec<f64>,
}

impl Stabilization {
    /// `τ|_K = scale · ‖K‖₂` with the conductivity of the element's region.
    pub fn from_conductivity(mesh: &Mesh, domain: &DomainSpec, scale: f64) -> Self {
        let norm = |k: Matrix2<f64>| {
            k.symmetric_eigenvalues()
                .iter()
                .fold(0.0f64, |a, &b| a.max(b.abs()))
        };
        Stabilization {
            tau: mesh
                .regions
                .iter()
                .map(|&r| scale * norm(domain.conductivity(r)))
                .collect(),
        }
    }

    pub fn uniform(n: usize, tau: f64) -> Self {
        Stabilization { tau: vec![tau; n] }
    }
}

/// Global numbering of the unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub k: usize,
    pub num_elements: usize,
    pub num_edges: usize,
}

impl DofLayout {
    pub fn new(k: usize, num_elements: usize, num_edges: usize) -> Self {
        DofLayout {
            k,
            num_elements,
            num_edges,
        }
    }

    /// `dim P^k(K)`.
    pub fn n(&self) -> usize {
        dim(self.k)
    }

    /// `dim P^k(e)`.
    pub fn m(&self) -> usize {
        self.k + 1
    }

    pub fn element_size(&self) -> usize {
        3 * self.n()
    }

    pub fn element_offset(&self, t: usize) -> usize {
        t * self.element_size()
    }

    /// Coefficient `i` of flux component `comp` (0 = x, 1 = y) on element `t`.
    pub fn q_dof(&self, t: usize, comp: usize, i: usize) -> usize {
        self.element_offset(t) + comp * self.n() + i
    }

    pub fn u_dof(&self, t: usize, i: usize) -> usize {
        self.element_offset(t) + 2 * self.n() + i
    }

    pub fn num_element_dofs(&self) -> usize {
        self.num_elements * self.element_size()
    }

    pub fn lambda_dof(&self, e: usize, j: usize) -> usize {
        self.num_element_dofs() + e * self.m() + j
    }

    pub fn total(&self) -> usize {
        self.num_element_dofs() + self.num_edges * self.m()
    }
}

/// Equation family a row of the global system belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowBlock {
    /// Constitutive equation tested with `v ∈ [P^k(K)]²`.
    Hdg2,
    /// Local balance tested with `w ∈ P^k(K)`.
    Hdg1,
    /// Flux continuity on an interior edge.
    Conserv,
    /// Transferred Dirichlet condition.
    Dirichlet,
    /// Extrapolated Neumann condition.
    Neumann,
    /// Extrapolated flux-jump condition on an interface edge.
    InterfaceJump,
}

impl fmt::Display for RowBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowBlock::Hdg2 => "HDG2",
            RowBlock::Hdg1 => "HDG1",
            RowBlock::Conserv => "conserv",
            RowBlock::Dirichlet => "dirichlet-transfer",
            RowBlock::Neumann => "neumann-extrapolation",
            RowBlock::InterfaceJump => "interface-flux-jump",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Element-wise elimination onto the trace unknowns.
    #[default]
    Condensed,
    /// Sparse LU of the full system.
    Monolithic,
}

impl std::str::FromStr for SolverKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "condensed" => Ok(SolverKind::Condensed),
            "monolithic" => Ok(SolverKind::Monolithic),
            _ => Err(crate::Error::Config(format!(
                "unknown solver '{s}' (expected condensed or monolithic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HdgOptions {
    pub k: usize,
    /// Multiplier of the default `τ = ‖K‖₂`.
    pub tau_scale: f64,
    pub solver: SolverKind,
    /// Bound on the relative residual `‖Ax - b‖ / ‖b‖`.
    pub tol: f64,
}

impl HdgOptions {
    pub fn new(k: usize) -> Self {
        HdgOptions {
            k,
            tau_scale: 1.0,
            solver: SolverKind::Condensed,
            tol: 1e-10,
        }
    }
}

/// Assembles and solves one problem.
pub fn solve_problem(
    mesh: &Mesh,
    domain: &DomainSpec,
    paths: &PathFamily,
    data: &dyn ProblemData,
    opts: &HdgOptions,
) -> Result<FieldSolution> {
    let tau = Stabilization::from_conductivity(mesh, domain, opts.tau_scale);
    let system = assemble(mesh, domain, paths, opts.k, &tau, data)?;
    let report = system.solve(opts.solver, opts.tol)?;
    Ok(FieldSolution::new(mesh, &system, report))
}
