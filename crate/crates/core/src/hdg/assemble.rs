use nalgebra::{DMatrix, DVector, Matrix2};

use super::{DofLayout, ProblemData, RowBlock, Stabilization};
use crate::basis::{legendre01, ElementBasis};
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Region};
use crate::mesh::{EdgeClass, Mesh};
use crate::paths::{EdgePaths, PathFamily, Target, TransferPath};
use crate::quadrature::{edge_rule, element_rule, LineRule};

/// Local equations of one element: `a x_K + b λ_{∂K} + Σ c x_{K'} = f`.
#[derive(Debug, Clone)]
pub struct ElementBlock {
    pub region: Region,
    /// `3n × 3n`, rows and columns ordered `(q_x, q_y, u)`.
    pub a: DMatrix<f64>,
    /// `3n × 3m`, columns grouped by local edge.
    pub b: DMatrix<f64>,
    pub f: DVector<f64>,
    /// Couplings to the flux of region-two neighbours across interface edges.
    pub coupling: Vec<(usize, DMatrix<f64>)>,
}

/// Equations attached to one edge: `d λ_e + Σ c x_K = g`.
#[derive(Debug, Clone)]
pub struct EdgeBlock {
    pub class: EdgeClass,
    /// `m × m`; absent on Neumann and interface edges.
    pub d: Option<DMatrix<f64>>,
    /// `m × 3n` per referenced element.
    pub c: Vec<(usize, DMatrix<f64>)>,
    pub g: DVector<f64>,
}

/// Transferred scalar jump at the quadrature points of an interface edge,
/// affine in the fluxes of the two adjacent elements:
/// `s_D^h(x_j) = data[j] + w1[j]·q¹ + w2[j]·q²`.
#[derive(Debug, Clone)]
pub struct InterfaceShift {
    pub side_one: usize,
    pub side_two: usize,
    pub data: Vec<f64>,
    pub w1: Vec<DVector<f64>>,
    pub w2: Vec<DVector<f64>>,
}

impl InterfaceShift {
    /// Values at the edge quadrature points for flux coefficients `[q_x; q_y]`.
    pub fn values(&self, q1: &[f64], q2: &[f64]) -> Vec<f64> {
        (0..self.data.len())
            .map(|j| {
                let a: f64 = self.w1[j].iter().zip(q1).map(|(w, q)| w * q).sum();
                let b: f64 = self.w2[j].iter().zip(q2).map(|(w, q)| w * q).sum();
                self.data[j] + a + b
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct HdgSystem {
    pub layout: DofLayout,
    pub triangle_edges: Vec<[usize; 3]>,
    pub bases: Vec<ElementBasis>,
    pub tau: Vec<f64>,
    pub elements: Vec<ElementBlock>,
    pub edges: Vec<EdgeBlock>,
    pub shifts: Vec<Option<InterfaceShift>>,
}

impl HdgSystem {
    pub fn row_label(&self, row: usize) -> RowBlock {
        let l = &self.layout;
        if row < l.num_element_dofs() {
            if row % l.element_size() < 2 * l.n() {
                RowBlock::Hdg2
            } else {
                RowBlock::Hdg1
            }
        } else {
            let e = (row - l.num_element_dofs()) / l.m();
            match self.edges[e].class {
                EdgeClass::Interior => RowBlock::Conserv,
                EdgeClass::Dirichlet => RowBlock::Dirichlet,
                EdgeClass::Neumann => RowBlock::Neumann,
                EdgeClass::Interface => RowBlock::InterfaceJump,
            }
        }
    }

    pub fn row_labels(&self) -> Vec<RowBlock> {
        (0..self.layout.total())
            .map(|r| self.row_label(r))
            .collect()
    }
}

/// Values of the transfer line integral `∫_σ K⁻¹ E(q)·m` as a linear form in
/// the flux coefficients `[q_x; q_y]` of `basis`.
pub(crate) fn transfer_weights(
    basis: &ElementBasis,
    kinv: &Matrix2<f64>,
    path: &TransferPath,
    rule: &LineRule,
) -> DVector<f64> {
    let n = basis.len();
    let mut w = DVector::zeros(2 * n);
    let d = path.end - path.origin;
    if d.norm() == 0.0 {
        return w;
    }
    let kd = kinv * d;
    let mut phi = [0.0; 64];
    for (&t, &wt) in rule.points.iter().zip(&rule.weights) {
        basis.eval(path.origin + d * t, &mut phi[..n]);
        for j in 0..n {
            w[j] += wt * phi[j] * kd.x;
            w[n + j] += wt * phi[j] * kd.y;
        }
    }
    w
}

struct Ctx<'a> {
    mesh: &'a Mesh,
    domain: &'a DomainSpec,
    paths: &'a PathFamily,
    data: &'a dyn ProblemData,
    layout: DofLayout,
    tau: &'a [f64],
    bases: Vec<ElementBasis>,
    kinv: [Matrix2<f64>; 2],
    edge_rule: LineRule,
    path_rule: LineRule,
}

impl Ctx<'_> {
    fn edge_paths(&self, e: usize) -> Result<&EdgePaths> {
        let ep = self
            .paths
            .get(e)
            .ok_or_else(|| Error::InvariantViolation(format!("edge {e} has no transfer paths")))?;
        if ep.samples.len() != self.edge_rule.len() {
            return Err(Error::DimensionMismatch(format!(
                "edge {e} has {} path samples, the degree-{} edge rule needs {}",
                ep.samples.len(),
                self.layout.k,
                self.edge_rule.len()
            )));
        }
        Ok(ep)
    }

    fn kinv(&self, t: usize) -> &Matrix2<f64> {
        &self.kinv[self.mesh.regions[t].index()]
    }

    fn interface_shift(&self, e: usize) -> Result<InterfaceShift> {
        let edge = &self.mesh.edges[e];
        let [k1, k2] = edge.elements;
        if k2 == crate::mesh::Edge::NONE
            || self.mesh.regions[k1] != Region::One
            || self.mesh.regions[k2] != Region::Two
        {
            return Err(Error::InvariantViolation(format!(
                "interface edge {e} must separate a region-one and a region-two triangle"
            )));
        }
        let ep = self.edge_paths(e)?;
        let curve = self.domain.interface.as_ref().ok_or_else(|| {
            Error::InvariantViolation(format!(
                "interface edge {e} but the domain has no interface"
            ))
        })?;
        let len = self.mesh.edge_length(e);
        let tol = 0.01 * len * len;
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        for (_, p) in ep.all_paths() {
            let s = curve.implicit_value(p.origin).signum() * p.length();
            lo = lo.min(s);
            hi = hi.max(s);
        }
        if lo < -tol && hi > tol {
            return Err(Error::EdgeStraddlesInterface { edge: e });
        }
        let mut shift = InterfaceShift {
            side_one: k1,
            side_two: k2,
            data: Vec::with_capacity(ep.samples.len()),
            w1: Vec::with_capacity(ep.samples.len()),
            w2: Vec::with_capacity(ep.samples.len()),
        };
        for p in &ep.samples {
            shift.data.push(self.data.jump_value(p.end));
            shift.w1.push(transfer_weights(
                &self.bases[k1],
                self.kinv(k1),
                p,
                &self.path_rule,
            ));
            shift.w2.push(-transfer_weights(
                &self.bases[k2],
                self.kinv(k2),
                p,
                &self.path_rule,
            ));
        }
        Ok(shift)
    }

    fn element_block(&self, t: usize, shifts: &[Option<InterfaceShift>]) -> ElementBlock {
        let n = self.layout.n();
        let m = self.layout.m();
        let k = self.layout.k;
        let basis = &self.bases[t];
        let kinv = self.kinv(t);
        let tau = self.tau[t];
        let region = self.mesh.regions[t];
        let mut a = DMatrix::<f64>::zeros(3 * n, 3 * n);
        let mut b = DMatrix::<f64>::zeros(3 * n, 3 * m);
        let mut f = DVector::<f64>::zeros(3 * n);
        let mut coupling: Vec<(usize, DMatrix<f64>)> = Vec::new();

        let (pts, wts) = element_rule(k).map(&self.mesh.triangle_points(t));
        let (mut phi, mut dx, mut dy) = ([0.0; 64], [0.0; 64], [0.0; 64]);
        for (x, &w) in pts.iter().zip(&wts) {
            basis.eval(*x, &mut phi[..n]);
            basis.eval_grad(*x, &mut dx[..n], &mut dy[..n]);
            let src = self.data.source(region, *x);
            for i in 0..n {
                for j in 0..n {
                    let pp = w * phi[i] * phi[j];
                    a[(i, j)] += kinv[(0, 0)] * pp;
                    a[(i, n + j)] += kinv[(0, 1)] * pp;
                    a[(n + i, j)] += kinv[(1, 0)] * pp;
                    a[(n + i, n + j)] += kinv[(1, 1)] * pp;
                    // -(u, ∇·v)
                    a[(i, 2 * n + j)] -= w * phi[j] * dx[i];
                    a[(n + i, 2 * n + j)] -= w * phi[j] * dy[i];
                    // (q, ∇w)
                    a[(2 * n + i, j)] += w * phi[j] * dx[i];
                    a[(2 * n + i, n + j)] += w * phi[j] * dy[i];
                }
                f[2 * n + i] += w * src * phi[i];
            }
        }

        let mut mu = [0.0; 16];
        for (le, &e) in self.triangle_edges(t).iter().enumerate() {
            let (pa, pb) = self.mesh.edge_points(e);
            let len = (pb - pa).norm();
            let nk = self.mesh.outward_normal(t, e);
            let shift = shifts[e].as_ref().filter(|s| s.side_one == t);
            for (qi, (&s, &wr)) in self
                .edge_rule
                .points
                .iter()
                .zip(&self.edge_rule.weights)
                .enumerate()
            {
                let x = pa + (pb - pa) * s;
                let wq = len * wr;
                basis.eval(x, &mut phi[..n]);
                legendre01(k, s, &mut mu[..m]);
                for i in 0..n {
                    for j in 0..n {
                        let pp = wq * phi[i] * phi[j];
                        a[(2 * n + i, j)] -= nk.x * pp;
                        a[(2 * n + i, n + j)] -= nk.y * pp;
                        a[(2 * n + i, 2 * n + j)] -= tau * pp;
                    }
                    for j in 0..m {
                        let pm = wq * phi[i] * mu[j];
                        b[(i, le * m + j)] += nk.x * pm;
                        b[(n + i, le * m + j)] += nk.y * pm;
                        b[(2 * n + i, le * m + j)] += tau * pm;
                    }
                }
                if let Some(sh) = shift {
                    // û = λ + s_D^h on the region-one side
                    let mut cv = DVector::<f64>::zeros(3 * n);
                    for i in 0..n {
                        cv[i] = wq * nk.x * phi[i];
                        cv[n + i] = wq * nk.y * phi[i];
                        cv[2 * n + i] = wq * tau * phi[i];
                    }
                    f.axpy(-sh.data[qi], &cv, 1.0);
                    let w1 = &sh.w1[qi];
                    let w2 = &sh.w2[qi];
                    let pos = match coupling.iter().position(|(o, _)| *o == sh.side_two) {
                        Some(p) => p,
                        None => {
                            coupling.push((sh.side_two, DMatrix::zeros(3 * n, 3 * n)));
                            coupling.len() - 1
                        }
                    };
                    let c2 = &mut coupling[pos].1;
                    for r in 0..3 * n {
                        if cv[r] == 0.0 {
                            continue;
                        }
                        for j in 0..2 * n {
                            a[(r, j)] += cv[r] * w1[j];
                            c2[(r, j)] += cv[r] * w2[j];
                        }
                    }
                }
            }
        }
        ElementBlock {
            region,
            a,
            b,
            f,
            coupling,
        }
    }

    fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.mesh.triangle_edges[t]
    }

    fn edge_block(&self, e: usize) -> Result<EdgeBlock> {
        let n = self.layout.n();
        let m = self.layout.m();
        let k = self.layout.k;
        let edge = &self.mesh.edges[e];
        let (pa, pb) = self.mesh.edge_points(e);
        let len = (pb - pa).norm();
        let mut d = DMatrix::<f64>::zeros(m, m);
        let mut g = DVector::<f64>::zeros(m);
        let mut c: Vec<(usize, DMatrix<f64>)> = Vec::new();
        let mut phi = [0.0; 64];
        let mut mu = [0.0; 16];
        let rule = &self.edge_rule;
        match edge.class {
            EdgeClass::Interior => {
                for &t in &edge.elements {
                    let basis = &self.bases[t];
                    let nk = self.mesh.outward_normal(t, e);
                    let tau = self.tau[t];
                    let mut ct = DMatrix::<f64>::zeros(m, 3 * n);
                    for (&s, &wr) in rule.points.iter().zip(&rule.weights) {
                        let wq = len * wr;
                        basis.eval(pa + (pb - pa) * s, &mut phi[..n]);
                        legendre01(k, s, &mut mu[..m]);
                        for i in 0..m {
                            for j in 0..n {
                                let pm = wq * mu[i] * phi[j];
                                ct[(i, j)] += nk.x * pm;
                                ct[(i, n + j)] += nk.y * pm;
                                ct[(i, 2 * n + j)] += tau * pm;
                            }
                            for j in 0..m {
                                d[(i, j)] -= wq * tau * mu[i] * mu[j];
                            }
                        }
                    }
                    c.push((t, ct));
                }
                Ok(EdgeBlock {
                    class: edge.class,
                    d: Some(d),
                    c,
                    g,
                })
            }
            EdgeClass::Dirichlet => {
                let t = edge.elements[0];
                let ep = self.edge_paths(e)?;
                let mut ct = DMatrix::<f64>::zeros(m, 3 * n);
                for (qi, (&s, &wr)) in rule.points.iter().zip(&rule.weights).enumerate() {
                    let wq = len * wr;
                    let path = &ep.samples[qi];
                    legendre01(k, s, &mut mu[..m]);
                    let w = transfer_weights(&self.bases[t], self.kinv(t), path, &self.path_rule);
                    let gd = self.data.dirichlet(path.end);
                    for i in 0..m {
                        for j in 0..m {
                            d[(i, j)] += wq * mu[i] * mu[j];
                        }
                        for j in 0..2 * n {
                            ct[(i, j)] -= wq * mu[i] * w[j];
                        }
                        g[i] += wq * mu[i] * gd;
                    }
                }
                c.push((t, ct));
                Ok(EdgeBlock {
                    class: edge.class,
                    d: Some(d),
                    c,
                    g,
                })
            }
            EdgeClass::Neumann => {
                let t = edge.elements[0];
                let ep = self.edge_paths(e)?;
                let Target::Boundary(part) = ep.target else {
                    return Err(Error::InvariantViolation(format!(
                        "Neumann edge {e} has paths to the interface"
                    )));
                };
                let part = &self.domain.boundary[part];
                let mut ct = DMatrix::<f64>::zeros(m, 3 * n);
                for (qi, (&s, &wr)) in rule.points.iter().zip(&rule.weights).enumerate() {
                    let wq = len * wr;
                    let y = ep.samples[qi].end;
                    let nn = part.outward_normal(y)?;
                    self.bases[t].eval(y, &mut phi[..n]);
                    legendre01(k, s, &mut mu[..m]);
                    let gn = self.data.neumann(y, nn);
                    for i in 0..m {
                        for j in 0..n {
                            let pm = wq * mu[i] * phi[j];
                            ct[(i, j)] += nn.x * pm;
                            ct[(i, n + j)] += nn.y * pm;
                        }
                        g[i] += wq * mu[i] * gn;
                    }
                }
                c.push((t, ct));
                Ok(EdgeBlock {
                    class: edge.class,
                    d: None,
                    c,
                    g,
                })
            }
            EdgeClass::Interface => {
                let [k1, k2] = edge.elements;
                let ep = self.edge_paths(e)?;
                let curve = self.domain.interface.as_ref().ok_or_else(|| {
                    Error::InvariantViolation(format!(
                        "interface edge {e} but the domain has no interface"
                    ))
                })?;
                let mut c1 = DMatrix::<f64>::zeros(m, 3 * n);
                let mut c2 = DMatrix::<f64>::zeros(m, 3 * n);
                let mut phi2 = [0.0; 64];
                for (qi, (&s, &wr)) in rule.points.iter().zip(&rule.weights).enumerate() {
                    let wq = len * wr;
                    let y = ep.samples[qi].end;
                    let n1 = curve.outward_normal(y)?;
                    self.bases[k1].eval(y, &mut phi[..n]);
                    self.bases[k2].eval(y, &mut phi2[..n]);
                    legendre01(k, s, &mut mu[..m]);
                    let sn = self.data.jump_flux(y, n1);
                    for i in 0..m {
                        for j in 0..n {
                            c1[(i, j)] += wq * mu[i] * phi[j] * n1.x;
                            c1[(i, n + j)] += wq * mu[i] * phi[j] * n1.y;
                            c2[(i, j)] -= wq * mu[i] * phi2[j] * n1.x;
                            c2[(i, n + j)] -= wq * mu[i] * phi2[j] * n1.y;
                        }
                        g[i] += wq * mu[i] * sn;
                    }
                }
                c.push((k1, c1));
                c.push((k2, c2));
                Ok(EdgeBlock {
                    class: edge.class,
                    d: None,
                    c,
                    g,
                })
            }
        }
    }
}

/// Builds the structured global system.
pub fn assemble(
    mesh: &Mesh,
    domain: &DomainSpec,
    paths: &PathFamily,
    k: usize,
    tau: &Stabilization,
    data: &dyn ProblemData,
) -> Result<HdgSystem> {
    let nt = mesh.num_triangles();
    if tau.tau.len() != nt {
        return Err(Error::DimensionMismatch(format!(
            "{} stabilization values for {nt} elements",
            tau.tau.len()
        )));
    }
    if let Some(t) = tau.tau.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::InvalidParameters(format!(
            "stabilization on element {t} is not positive"
        )));
    }
    if paths.edges.len() != mesh.num_edges() {
        return Err(Error::DimensionMismatch(format!(
            "path family covers {} edges, mesh has {}",
            paths.edges.len(),
            mesh.num_edges()
        )));
    }
    domain.validate()?;
    let bases = (0..nt)
        .map(|t| {
            ElementBasis::new(&mesh.triangle_points(t), k).map_err(|e| match e {
                Error::SingularElement { area, .. } => Error::SingularElement { element: t, area },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let inv = |r: Region| {
        domain
            .conductivity(r)
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameters("singular conductivity".into()))
    };
    let ctx = Ctx {
        mesh,
        domain,
        paths,
        data,
        layout: DofLayout::new(k, nt, mesh.num_edges()),
        tau: &tau.tau,
        bases,
        kinv: [inv(Region::One)?, inv(Region::Two)?],
        edge_rule: edge_rule(k),
        path_rule: edge_rule(k),
    };
    let shifts = (0..mesh.num_edges())
        .map(|e| {
            if mesh.edges[e].class == EdgeClass::Interface {
                ctx.interface_shift(e).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let elements = (0..nt).map(|t| ctx.element_block(t, &shifts)).collect();
    let edges = (0..mesh.num_edges())
        .map(|e| ctx.edge_block(e))
        .collect::<Result<Vec<_>>>()?;
    Ok(HdgSystem {
        layout: ctx.layout,
        triangle_edges: mesh.triangle_edges.clone(),
        bases: ctx.bases,
        tau: tau.tau.clone(),
        elements,
        edges,
        shifts,
    })
}
