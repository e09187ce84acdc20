use nalgebra::{DMatrix, Matrix2};

use curved_hdg::analysis::case;
use curved_hdg::geometry::{Point, Region};
use curved_hdg::hdg::{assemble, Stabilization};
use curved_hdg::mesh::{EdgeClass, Mesh};
use curved_hdg::paths::build_paths;
use curved_hdg::postprocess::postprocess;
use curved_hdg::quadrature::{LineRule, TriangleRule};
use curved_hdg::run::{run_level, LevelOptions};

/// Scaled monomials `((x - c)/s)^a ((y - c)/s)^b`, `a + b ≤ k`, with gradients.
struct Monomials {
    c: Point,
    s: f64,
    powers: Vec<(i32, i32)>,
}

impl Monomials {
    fn new(tri: &[Point; 3], k: usize) -> Self {
        let c = (tri[0] + tri[1] + tri[2]) / 3.0;
        let s = (tri[1] - tri[0]).norm();
        let powers = (0..=k as i32)
            .flat_map(|d| (0..=d).map(move |j| (d - j, j)))
            .collect();
        Monomials { c, s, powers }
    }
    fn len(&self) -> usize {
        self.powers.len()
    }
    fn value(&self, i: usize, x: Point) -> f64 {
        let (a, b) = self.powers[i];
        let r = (x - self.c) / self.s;
        r.x.powi(a) * r.y.powi(b)
    }
    fn grad(&self, i: usize, x: Point) -> Point {
        let (a, b) = self.powers[i];
        let r = (x - self.c) / self.s;
        let gx = if a > 0 {
            a as f64 * r.x.powi(a - 1) * r.y.powi(b)
        } else {
            0.0
        };
        let gy = if b > 0 {
            b as f64 * r.x.powi(a) * r.y.powi(b - 1)
        } else {
            0.0
        };
        Point::new(gx, gy) / self.s
    }
}

/// Orthonormal shifted Legendre polynomials on [0, 1] up to degree 3.
fn legendre(j: usize, s: f64) -> f64 {
    let x = 2.0 * s - 1.0;
    let p = match j {
        0 => 1.0,
        1 => x,
        2 => 0.5 * (3.0 * x * x - 1.0),
        3 => 0.5 * (5.0 * x * x * x - 3.0 * x),
        _ => unreachable!(),
    };
    (2.0 * j as f64 + 1.0).sqrt() * p
}

fn map(tri: &[Point; 3], r: [f64; 2]) -> Point {
    tri[0] + (tri[1] - tri[0]) * r[0] + (tri[2] - tri[0]) * r[1]
}

/// `T` with `φ_j = Σ_a T[a, j] m_a`, fitted to values at quadrature points.
fn change_of_basis(
    tri: &[Point; 3],
    mono: &Monomials,
    phi: impl Fn(Point) -> Vec<f64>,
) -> DMatrix<f64> {
    let n = mono.len();
    let rule = TriangleRule::collapsed(4);
    let pts: Vec<Point> = rule.points.iter().map(|&r| map(tri, r)).collect();
    let v = DMatrix::from_fn(pts.len(), n, |r, a| mono.value(a, pts[r]));
    let f = DMatrix::from_fn(pts.len(), n, |r, j| phi(pts[r])[j]);
    v.svd(true, true).solve(&f, 1e-14).unwrap()
}

fn block_diag3(t: &DMatrix<f64>) -> DMatrix<f64> {
    let n = t.nrows();
    let mut out = DMatrix::zeros(3 * n, 3 * n);
    for b in 0..3 {
        out.view_mut((b * n, b * n), (n, n)).copy_from(t);
    }
    out
}

fn outward(tri: &[Point; 3], a: Point, b: Point) -> Point {
    let d = b - a;
    let n = Point::new(d.y, -d.x).normalize();
    let centre = (tri[0] + tri[1] + tri[2]) / 3.0;
    if n.dot(&(a - centre)) > 0.0 {
        n
    } else {
        -n
    }
}

fn interior_element(mesh: &Mesh) -> usize {
    (0..mesh.num_triangles())
        .rev()
        .find(|&t| {
            mesh.triangle_edges[t]
                .iter()
                .all(|&e| mesh.edges[e].class == EdgeClass::Interior)
        })
        .unwrap()
}

#[test]
fn element_blocks_match_a_monomial_oracle() {
    let c = case("ex6").unwrap();
    let mesh = c.build_mesh(c.default_fit, 6).unwrap();
    let k = 2;
    let paths = build_paths(&mesh, &c.domain, c.default_paths, k).unwrap();
    let tau = Stabilization::uniform(mesh.num_triangles(), 2.5);
    let sys = assemble(&mesh, &c.domain, &paths, k, &tau, &c).unwrap();
    let t = (0..mesh.num_triangles())
        .find(|&t| {
            mesh.regions[t] == Region::Two
                && mesh.triangle_edges[t]
                    .iter()
                    .all(|&e| mesh.edges[e].class == EdgeClass::Interior)
        })
        .unwrap();
    let tri = mesh.triangle_points(t);
    let kinv: Matrix2<f64> = c.domain.conductivity(Region::Two).try_inverse().unwrap();
    let mono = Monomials::new(&tri, k);
    let n = mono.len();
    let m = k + 1;

    let mut a = DMatrix::<f64>::zeros(3 * n, 3 * n);
    let mut b = DMatrix::<f64>::zeros(3 * n, 3 * m);
    let rule = TriangleRule::collapsed(6);
    let jac = ((tri[1] - tri[0]).perp(&(tri[2] - tri[0]))).abs();
    for (r, w) in rule.points.iter().zip(&rule.weights) {
        let x = map(&tri, *r);
        let w = w * jac;
        for i in 0..n {
            for j in 0..n {
                let pp = w * mono.value(i, x) * mono.value(j, x);
                for (bi, bj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    a[(bi * n + i, bj * n + j)] += kinv[(bi, bj)] * pp;
                }
                let gi = mono.grad(i, x);
                a[(i, 2 * n + j)] -= w * mono.value(j, x) * gi.x;
                a[(n + i, 2 * n + j)] -= w * mono.value(j, x) * gi.y;
                a[(2 * n + i, j)] += w * mono.value(j, x) * gi.x;
                a[(2 * n + i, n + j)] += w * mono.value(j, x) * gi.y;
            }
        }
    }
    let line = LineRule::gauss(6);
    for (le, &e) in sys.triangle_edges[t].iter().enumerate() {
        let (pa, pb) = mesh.edge_points(e);
        let nk = outward(&tri, pa, pb);
        let len = (pb - pa).norm();
        for (&s, &w) in line.points.iter().zip(&line.weights) {
            let x = pa + (pb - pa) * s;
            let w = w * len;
            for i in 0..n {
                for j in 0..n {
                    let pp = w * mono.value(i, x) * mono.value(j, x);
                    a[(2 * n + i, j)] -= nk.x * pp;
                    a[(2 * n + i, n + j)] -= nk.y * pp;
                    a[(2 * n + i, 2 * n + j)] -= 2.5 * pp;
                }
                for j in 0..m {
                    let pm = w * mono.value(i, x) * legendre(j, s);
                    b[(i, le * m + j)] += nk.x * pm;
                    b[(n + i, le * m + j)] += nk.y * pm;
                    b[(2 * n + i, le * m + j)] += 2.5 * pm;
                }
            }
        }
    }

    let basis = &sys.bases[t];
    let tm = block_diag3(&change_of_basis(&tri, &mono, |x| {
        basis.values(x).as_slice().to_vec()
    }));
    let a_oracle = tm.transpose() * a * &tm;
    let b_oracle = tm.transpose() * b;
    let blk = &sys.elements[t];
    let scale = a_oracle.amax().max(b_oracle.amax());
    assert!(
        (&blk.a - &a_oracle).amax() <= 1e-12 * scale,
        "a differs by {:e}",
        (&blk.a - &a_oracle).amax()
    );
    assert!((&blk.b - b_oracle).amax() <= 1e-12 * scale);
}

#[test]
fn postprocessing_matches_a_monomial_least_squares_oracle() {
    let c = case("ex1").unwrap();
    let k = 2;
    let out = run_level(&c, 6, &LevelOptions::for_case(&c, k)).unwrap();
    let post = postprocess(&out.solution, &out.mesh, &c.domain).unwrap();
    let t = interior_element(&out.mesh);
    let tri = out.mesh.triangle_points(t);
    let mono = Monomials::new(&tri, k + 1);
    let n = mono.len();
    // minimize ‖∇u* + q_h‖² subject to the mean of u* equal to the mean of u_h
    let rule = TriangleRule::collapsed(6);
    let jac = ((tri[1] - tri[0]).perp(&(tri[2] - tri[0]))).abs();
    let mut sys = DMatrix::<f64>::zeros(n + 1, n + 1);
    let mut rhs = nalgebra::DVector::<f64>::zeros(n + 1);
    for (r, w) in rule.points.iter().zip(&rule.weights) {
        let x = map(&tri, *r);
        let w = w * jac;
        let q = out.solution.q(t, x);
        for i in 0..n {
            let gi = mono.grad(i, x);
            for j in 0..n {
                sys[(i, j)] += w * gi.dot(&mono.grad(j, x));
            }
            rhs[i] -= w * gi.dot(&q);
            sys[(i, n)] += w * mono.value(i, x);
            sys[(n, i)] += w * mono.value(i, x);
        }
        rhs[n] += w * out.solution.u(t, x);
    }
    let coef = sys.lu().solve(&rhs).unwrap();
    for r in &rule.points {
        let x = map(&tri, *r);
        let oracle: f64 = (0..n).map(|i| coef[i] * mono.value(i, x)).sum();
        assert!((post.evaluate(t, x) - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
    }
}
