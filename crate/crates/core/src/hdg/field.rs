use super::{DofLayout, HdgSystem, ProblemData, SolveReport};
use crate::basis::{legendre01, ElementBasis};
use crate::geometry::Point;
use crate::mesh::{EdgeClass, Mesh};
use crate::quadrature::{edge_rule, element_rule};

/// Discrete fields recovered from a solved system.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    pub layout: DofLayout,
    pub coefficients: Vec<f64>,
    pub bases: Vec<ElementBasis>,
    pub tau: Vec<f64>,
    /// `s_D^h` at the edge quadrature points of each interface edge.
    pub interface_shift: Vec<Option<Vec<f64>>>,
    pub residual: f64,
}

impl FieldSolution {
    pub fn new(_mesh: &Mesh, system: &HdgSystem, report: SolveReport) -> Self {
        let layout = system.layout;
        let mut sol = FieldSolution {
            layout,
            coefficients: report.x,
            bases: system.bases.clone(),
            tau: system.tau.clone(),
            interface_shift: vec![None; layout.num_edges],
            residual: report.residual,
        };
        for (e, shift) in system.shifts.iter().enumerate() {
            if let Some(sh) = shift {
                let v = sh.values(
                    sol.q_coefficients(sh.side_one),
                    sol.q_coefficients(sh.side_two),
                );
                sol.interface_shift[e] = Some(v);
            }
        }
        sol
    }

    pub fn k(&self) -> usize {
        self.layout.k
    }

    /// `[q_x; q_y]` coefficients of element `t`.
    pub fn q_coefficients(&self, t: usize) -> &[f64] {
        let o = self.layout.element_offset(t);
        &self.coefficients[o..o + 2 * self.layout.n()]
    }

    pub fn u_coefficients(&self, t: usize) -> &[f64] {
        let o = self.layout.u_dof(t, 0);
        &self.coefficients[o..o + self.layout.n()]
    }

    pub fn lambda_coefficients(&self, e: usize) -> &[f64] {
        let o = self.layout.lambda_dof(e, 0);
        &self.coefficients[o..o + self.layout.m()]
    }

    /// `u_h` of element `t` (extended polynomially outside the element).
    pub fn u(&self, t: usize, x: Point) -> f64 {
        self.bases[t].evaluate(self.u_coefficients(t), x)
    }

    pub fn q(&self, t: usize, x: Point) -> Point {
        let n = self.layout.n();
        let c = self.q_coefficients(t);
        Point::new(
            self.bases[t].evaluate(&c[..n], x),
            self.bases[t].evaluate(&c[n..], x),
        )
    }

    /// Trace `λ_h` on edge `e` at parameter `s` measured from its first vertex.
    pub fn lambda(&self, e: usize, s: f64) -> f64 {
        let m = self.layout.m();
        let mut mu = [0.0; 16];
        legendre01(self.layout.k, s, &mut mu[..m]);
        mu[..m]
            .iter()
            .zip(self.lambda_coefficients(e))
            .map(|(a, b)| a * b)
            .sum()
    }

    /// `û_h` seen from element `t` at the edge quadrature points of `e`.
    pub fn uhat_at_quadrature(&self, mesh: &Mesh, t: usize, e: usize) -> Vec<f64> {
        let rule = edge_rule(self.layout.k);
        let mut v: Vec<f64> = rule.points.iter().map(|&s| self.lambda(e, s)).collect();
        if mesh.edges[e].class == EdgeClass::Interface && mesh.edges[e].elements[0] == t {
            if let Some(shift) = &self.interface_shift[e] {
                for (a, b) in v.iter_mut().zip(shift) {
                    *a += b;
                }
            }
        }
        v
    }

    /// `q̂_h·n_K = q_h·n_K + τ(u_h - û_h)` at the edge quadrature points of `e`.
    pub fn flux_at_quadrature(&self, mesh: &Mesh, t: usize, e: usize) -> Vec<f64> {
        let rule = edge_rule(self.layout.k);
        let (a, b) = mesh.edge_points(e);
        let n = mesh.outward_normal(t, e);
        let uhat = self.uhat_at_quadrature(mesh, t, e);
        rule.points
            .iter()
            .zip(&uhat)
            .map(|(&s, &uh)| {
                let x = a + (b - a) * s;
                self.q(t, x).dot(&n) + self.tau[t] * (self.u(t, x) - uh)
            })
            .collect()
    }
}

/// Per-element balance `⟨q̂·n, 1⟩_{∂K} + (f, 1)_K` of `-∇·q = f`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservationReport {
    pub residuals: Vec<f64>,
    /// Elements without Neumann or interface edges.
    pub standard: Vec<bool>,
}

impl ConservationReport {
    pub fn max_standard(&self) -> f64 {
        self.residuals
            .iter()
            .zip(&self.standard)
            .filter(|(_, s)| **s)
            .fold(0.0, |a, (r, _)| a.max(r.abs()))
    }

    pub fn max_other(&self) -> f64 {
        self.residuals
            .iter()
            .zip(&self.standard)
            .filter(|(_, s)| !**s)
            .fold(0.0, |a, (r, _)| a.max(r.abs()))
    }
}

pub fn local_conservation(
    sol: &FieldSolution,
    mesh: &Mesh,
    data: &dyn ProblemData,
) -> ConservationReport {
    let k = sol.k();
    let rule = edge_rule(k);
    let vol = element_rule(k);
    let mut residuals = Vec::with_capacity(mesh.num_triangles());
    let mut standard = Vec::with_capacity(mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let mut r = 0.0;
        let mut std_elem = true;
        for &e in &mesh.triangle_edges[t] {
            let len = mesh.edge_length(e);
            let flux = sol.flux_at_quadrature(mesh, t, e);
            r += len
                * rule
                    .weights
                    .iter()
                    .zip(&flux)
                    .map(|(w, f)| w * f)
                    .sum::<f64>();
            std_elem &= matches!(
                mesh.edges[e].class,
                EdgeClass::Interior | EdgeClass::Dirichlet
            );
        }
        let (pts, wts) = vol.map(&mesh.triangle_points(t));
        let region = mesh.regions[t];
        r += pts
            .iter()
            .zip(&wts)
            .map(|(x, w)| w * data.source(region, *x))
            .sum::<f64>();
        residuals.push(r);
        standard.push(std_elem);
    }
    ConservationReport {
        residuals,
        standard,
    }
}
