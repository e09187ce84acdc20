use super::ManufacturedCase;
use crate::basis::legendre01;
use crate::hdg::FieldSolution;
use crate::mesh::{EdgeClass, Mesh};
use crate::postprocess::PostprocessedField;
use crate::quadrature::{edge_rule, error_rule, LineRule};

/// Errors of one refinement level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormRow {
    pub h: f64,
    pub e_u: f64,
    pub e_q: f64,
    pub e_uhat: f64,
    pub e_ustar: f64,
}

#[derive(Default)]
struct Sums {
    u: f64,
    q: f64,
    ustar: f64,
    area: f64,
    trace: f64,
    trace_weight: f64,
}

fn element_sums(
    sol: &FieldSolution,
    post: &PostprocessedField,
    case: &ManufacturedCase,
    mesh: &Mesh,
    t: usize,
    s: &mut Sums,
) {
    let rule = error_rule(sol.k());
    let region = mesh.regions[t];
    let (pts, wts) = rule.map(&mesh.triangle_points(t));
    for (x, &w) in pts.iter().zip(&wts) {
        let u = case.u(region, *x);
        s.u += w * (u - sol.u(t, *x)).powi(2);
        s.q += w * (case.q(region, *x) - sol.q(t, *x)).norm_squared();
        s.ustar += w * (u - post.evaluate(t, *x)).powi(2);
    }
    s.area += mesh.area(t);
}

/// `h_K ‖P_∂u - û_h‖²_{∂K}` and `h_K |∂K|`.
fn trace_terms(sol: &FieldSolution, case: &ManufacturedCase, mesh: &Mesh, t: usize) -> (f64, f64) {
    let k = sol.k();
    let m = k + 1;
    let rule = edge_rule(k);
    let proj_rule = LineRule::gauss(k + 6);
    let region = mesh.regions[t];
    let hk = mesh.diameter(t);
    let mut mu = [0.0; 16];
    let (mut err, mut perim) = (0.0, 0.0);
    for &e in &mesh.triangle_edges[t] {
        let (a, b) = mesh.edge_points(e);
        let len = (b - a).norm();
        let mut c = [0.0; 16];
        for (&s, &w) in proj_rule.points.iter().zip(&proj_rule.weights) {
            legendre01(k, s, &mut mu[..m]);
            let u = case.u(region, a + (b - a) * s);
            for j in 0..m {
                c[j] += w * u * mu[j];
            }
        }
        let uhat = sol.uhat_at_quadrature(mesh, t, e);
        for ((&s, &w), &uh) in rule.points.iter().zip(&rule.weights).zip(&uhat) {
            legendre01(k, s, &mut mu[..m]);
            let pu: f64 = (0..m).map(|j| c[j] * mu[j]).sum();
            err += len * w * (pu - uh).powi(2);
        }
        perim += len;
    }
    (hk * err, hk * perim)
}

/// Normalized interior norms `‖e‖_{L²(D_h)} / |D_h|^{1/2}` and the weighted
/// trace norm over all elements.
pub fn error_norms(
    sol: &FieldSolution,
    post: &PostprocessedField,
    case: &ManufacturedCase,
    mesh: &Mesh,
) -> NormRow {
    let mut s = Sums::default();
    for t in 0..mesh.num_triangles() {
        element_sums(sol, post, case, mesh, t, &mut s);
        let (tr, tw) = trace_terms(sol, case, mesh, t);
        s.trace += tr;
        s.trace_weight += tw;
    }
    NormRow {
        h: mesh.h(),
        e_u: (s.u / s.area).sqrt(),
        e_q: (s.q / s.area).sqrt(),
        e_uhat: (s.trace / s.trace_weight).sqrt(),
        e_ustar: (s.ustar / s.area).sqrt(),
    }
}

/// Unnormalized norms over the triangles without interface edges; the trace
/// norm also skips triangles touching the interface at a vertex.
pub fn interface_error_norms(
    sol: &FieldSolution,
    post: &PostprocessedField,
    case: &ManufacturedCase,
    mesh: &Mesh,
) -> NormRow {
    let mut on_interface = vec![false; mesh.vertices.len()];
    for e in mesh.edges_of_class(EdgeClass::Interface) {
        for v in mesh.edges[e].vertices {
            on_interface[v] = true;
        }
    }
    let mut s = Sums::default();
    for t in 0..mesh.num_triangles() {
        if mesh.triangle_edges[t]
            .iter()
            .any(|&e| mesh.edges[e].class == EdgeClass::Interface)
        {
            continue;
        }
        element_sums(sol, post, case, mesh, t, &mut s);
        if mesh.triangles[t].iter().all(|&v| !on_interface[v]) {
            s.trace += trace_terms(sol, case, mesh, t).0;
        }
    }
    NormRow {
        h: mesh.h(),
        e_u: s.u.sqrt(),
        e_q: s.q.sqrt(),
        e_uhat: s.trace.sqrt(),
        e_ustar: s.ustar.sqrt(),
    }
}
