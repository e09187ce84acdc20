//! Element-by-element postprocessing `u*_h ∈ P^{k+1}(K)`.

use nalgebra::{DMatrix, DVector};

use crate::basis::ElementBasis;
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Point};
use crate::hdg::FieldSolution;
use crate::mesh::Mesh;
use crate::quadrature::{edge_rule, element_rule};

#[derive(Debug, Clone)]
pub struct PostprocessedField {
    pub degree: usize,
    pub bases: Vec<ElementBasis>,
    pub coefficients: Vec<DVector<f64>>,
}

impl PostprocessedField {
    pub fn evaluate(&self, t: usize, x: Point) -> f64 {
        self.bases[t].evaluate(self.coefficients[t].as_slice(), x)
    }

    /// `ū_h` of element `t` (the mean of `u*_h` over the element).
    pub fn mean(&self, t: usize, area: f64) -> f64 {
        self.coefficients[t][0] / area.sqrt()
    }
}

/// Solves `(∇ũ, ∇w)_K = -(K⁻¹q_h, ∇w)_K` for `ũ` with zero mean and adds
/// `ū_h`: the mean of the traces for `k = 0`, the mean of `u_h` otherwise.
pub fn postprocess(
    sol: &FieldSolution,
    mesh: &Mesh,
    domain: &DomainSpec,
) -> Result<PostprocessedField> {
    let k = sol.k();
    let rule = element_rule(k + 1);
    let erule = edge_rule(k);
    let mut bases = Vec::with_capacity(mesh.num_triangles());
    let mut coefficients = Vec::with_capacity(mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangle_points(t);
        let area = mesh.area(t);
        let basis = ElementBasis::new(&tri, k + 1)
            .map_err(|_| Error::SingularElement { element: t, area })?;
        let n = basis.len();
        let kinv = domain
            .conductivity(mesh.regions[t])
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameters("singular conductivity".into()))?;
        // the basis is orthonormal with a constant first function, so the
        // zero-mean subspace is spanned by the remaining functions
        let mut s = DMatrix::<f64>::zeros(n - 1, n - 1);
        let mut r = DVector::<f64>::zeros(n - 1);
        let (pts, wts) = rule.map(&tri);
        let (mut dx, mut dy) = ([0.0; 64], [0.0; 64]);
        let mut ubar = 0.0;
        for (x, &w) in pts.iter().zip(&wts) {
            basis.eval_grad(*x, &mut dx[..n], &mut dy[..n]);
            let g = -(kinv * sol.q(t, *x));
            for i in 1..n {
                for j in 1..n {
                    s[(i - 1, j - 1)] += w * (dx[i] * dx[j] + dy[i] * dy[j]);
                }
                r[i - 1] += w * (g.x * dx[i] + g.y * dy[i]);
            }
            ubar += w * sol.u(t, *x);
        }
        ubar /= area;
        if k == 0 {
            let mut sum = 0.0;
            for &e in &mesh.triangle_edges[t] {
                let uh = sol.uhat_at_quadrature(mesh, t, e);
                sum += erule
                    .weights
                    .iter()
                    .zip(&uh)
                    .map(|(w, v)| w * v)
                    .sum::<f64>();
            }
            ubar = sum / 3.0;
        }
        let chol = s
            .cholesky()
            .ok_or(Error::SingularElement { element: t, area })?;
        let tilde = chol.solve(&r);
        let mut c = DVector::<f64>::zeros(n);
        c[0] = ubar * area.sqrt();
        c.rows_mut(1, n - 1).copy_from(&tilde);
        bases.push(basis);
        coefficients.push(c);
    }
    Ok(PostprocessedField {
        degree: k + 1,
        bases,
        coefficients,
    })
}
