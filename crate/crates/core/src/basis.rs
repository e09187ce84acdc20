//! Orthonormal polynomial bases on triangles and Legendre bases on edges.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quadrature::TriangleRule;

/// Dimension of `P^k` in two variables.
pub fn dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Exponents `(a, b)` of the monomials `x^a y^b`, graded by total degree.
pub fn exponents(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dim(k));
    for d in 0..=k {
        for j in 0..=d {
            out.push((d - j, j));
        }
    }
    out
}

/// Basis of `P^k(K)` orthonormal in `L^2(K)`, built from scaled monomials
/// centred at the barycentre and orthonormalized against the element mass matrix.
/// The first function is the constant `|K|^{-1/2}`.
#[derive(Debug, Clone)]
pub struct ElementBasis {
    k: usize,
    center: Point,
    scale: f64,
    exps: Vec<(usize, usize)>,
    /// Row `i` holds the monomial coefficients of basis function `i`.
    coeffs: DMatrix<f64>,
}

impl ElementBasis {
    pub fn new(tri: &[Point; 3], k: usize) -> Result<Self> {
        let area = triangle_area(tri);
        let center = (tri[0] + tri[1] + tri[2]) / 3.0;
        let scale = diameter(tri);
        if !(area > 1e-14 * scale.max(1.0).powi(2)) {
            return Err(Error::SingularElement {
                element: usize::MAX,
                area,
            });
        }
        let exps = exponents(k);
        let n = exps.len();
        let mut basis = ElementBasis {
            k,
            center,
            scale,
            exps,
            coeffs: DMatrix::identity(n, n),
        };
        let rule = TriangleRule::with_degree(2 * k);
        let (pts, wts) = rule.map(tri);
        let mut mass = DMatrix::<f64>::zeros(n, n);
        let mut m = vec![0.0; n];
        for (p, w) in pts.iter().zip(&wts) {
            basis.monomials(*p, &mut m);
            for i in 0..n {
                for j in 0..=i {
                    mass[(i, j)] += w * m[i] * m[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                mass[(j, i)] = mass[(i, j)];
            }
        }
        let chol = mass.cholesky().ok_or(Error::SingularElement {
            element: usize::MAX,
            area,
        })?;
        let l = chol.l();
        basis.coeffs =
            l.solve_lower_triangular(&DMatrix::identity(n, n))
                .ok_or(Error::SingularElement {
                    element: usize::MAX,
                    area,
                })?;
        Ok(basis)
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    fn monomials(&self, x: Point, out: &mut [f64]) {
        let s = (x - self.center) / self.scale;
        for (o, &(a, b)) in out.iter_mut().zip(&self.exps) {
            *o = s.x.powi(a as i32) * s.y.powi(b as i32);
        }
    }

    /// Values of all basis functions at `x` (any point of the plane).
    pub fn eval(&self, x: Point, out: &mut [f64]) {
        let n = self.len();
        let mut m = [0.0; 64];
        self.monomials(x, &mut m[..n]);
        for i in 0..n {
            let mut v = 0.0;
            for j in 0..=i {
                v += self.coeffs[(i, j)] * m[j];
            }
            out[i] = v;
        }
    }

    pub fn values(&self, x: Point) -> DVector<f64> {
        let mut v = DVector::zeros(self.len());
        self.eval(x, v.as_mut_slice());
        v
    }

    /// Gradients of all basis functions at `x`.
    pub fn eval_grad(&self, x: Point, dx: &mut [f64], dy: &mut [f64]) {
        let n = self.len();
        let s = (x - self.center) / self.scale;
        let mut mx = [0.0; 64];
        let mut my = [0.0; 64];
        for (j, &(a, b)) in self.exps.iter().enumerate() {
            mx[j] = if a > 0 {
                a as f64 * s.x.powi(a as i32 - 1) * s.y.powi(b as i32) / self.scale
            } else {
                0.0
            };
            my[j] = if b > 0 {
                b as f64 * s.x.powi(a as i32) * s.y.powi(b as i32 - 1) / self.scale
            } else {
                0.0
            };
        }
        for i in 0..n {
            let (mut gx, mut gy) = (0.0, 0.0);
            for j in 0..=i {
                gx += self.coeffs[(i, j)] * mx[j];
                gy += self.coeffs[(i, j)] * my[j];
            }
            dx[i] = gx;
            dy[i] = gy;
        }
    }

    /// Evaluates the polynomial with coefficients `c` at `x`.
    pub fn evaluate(&self, c: &[f64], x: Point) -> f64 {
        let mut v = [0.0; 64];
        let n = self.len();
        self.eval(x, &mut v[..n]);
        v[..n].iter().zip(c).map(|(a, b)| a * b).sum()
    }

    pub fn evaluate_grad(&self, c: &[f64], x: Point) -> Point {
        let n = self.len();
        let mut dx = [0.0; 64];
        let mut dy = [0.0; 64];
        self.eval_grad(x, &mut dx[..n], &mut dy[..n]);
        Point::new(
            dx[..n].iter().zip(c).map(|(a, b)| a * b).sum(),
            dy[..n].iter().zip(c).map(|(a, b)| a * b).sum(),
        )
    }
}

/// Orthonormal Legendre polynomials on [0, 1]: `sqrt(2j+1) P_j(2s-1)`, `j = 0..=k`.
pub fn legendre01(k: usize, s: f64, out: &mut [f64]) {
    let x = 2.0 * s - 1.0;
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 0..=k {
        let p = match j {
            0 => 1.0,
            1 => x,
            _ => {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
                p2
            }
        };
        out[j] = ((2 * j + 1) as f64).sqrt() * p;
    }
}

pub fn triangle_area(tri: &[Point; 3]) -> f64 {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    0.5 * (e1.x * e2.y - e1.y * e2.x)
}

/// Longest edge length.
pub fn diameter(tri: &[Point; 3]) -> f64 {
    (tri[1] - tri[0])
        .norm()
        .max((tri[2] - tri[1]).norm())
        .max((tri[0] - tri[2]).norm())
}
