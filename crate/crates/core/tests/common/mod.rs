#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use curved_hdg::analysis::ManufacturedCase;
use curved_hdg::geometry::{BcRule, BoundaryPart, Curve, DomainSpec, Point, Polygon, Region, Side};
use curved_hdg::hdg::{self, HdgOptions, ProblemData, SolverKind};
use curved_hdg::mesh::{generate_square_grid, Mesh};
use curved_hdg::paths::{build_paths, PathStrategy};
use curved_hdg::quadrature::{edge_rule, element_rule};

/// `u = Σ c_ij x^i y^j` over `i + j ≤ k`.
pub struct Poly {
    terms: Vec<(i32, i32, f64)>,
}

impl Poly {
    pub fn of_degree(k: i32) -> Self {
        let mut terms = Vec::new();
        let mut c = 0.7;
        for d in 0..=k {
            for j in 0..=d {
                terms.push((d - j, j, c));
                c = -0.6 * c + 0.31;
            }
        }
        Poly { terms }
    }
    pub fn u(&self, x: Point) -> f64 {
        self.terms
            .iter()
            .map(|&(i, j, c)| c * x.x.powi(i) * x.y.powi(j))
            .sum()
    }
    pub fn grad(&self, x: Point) -> Point {
        let mut g = Point::zeros();
        for &(i, j, c) in &self.terms {
            if i > 0 {
                g.x += c * i as f64 * x.x.powi(i - 1) * x.y.powi(j);
            }
            if j > 0 {
                g.y += c * j as f64 * x.x.powi(i) * x.y.powi(j - 1);
            }
        }
        g
    }
    fn laplacian(&self, x: Point) -> f64 {
        let mut l = 0.0;
        for &(i, j, c) in &self.terms {
            if i > 1 {
                l += c * (i * (i - 1)) as f64 * x.x.powi(i - 2) * x.y.powi(j);
            }
            if j > 1 {
                l += c * (j * (j - 1)) as f64 * x.x.powi(i) * x.y.powi(j - 2);
            }
        }
        l
    }
}

impl ProblemData for Poly {
    fn source(&self, _: Region, x: Point) -> f64 {
        self.laplacian(x)
    }
    fn dirichlet(&self, x: Point) -> f64 {
        self.u(x)
    }
    fn neumann(&self, x: Point, n: Point) -> f64 {
        -self.grad(x).dot(&n)
    }
}

pub fn square(rule: BcRule) -> DomainSpec {
    DomainSpec::new(vec![BoundaryPart::new(
        Curve::Polygon(Polygon::rectangle(Point::zeros(), Point::new(1.0, 1.0))),
        Side::Inside,
        rule,
    )])
}

pub fn left_side_neumann() -> DomainSpec {
    square(BcRule::NeumannOnSegment {
        a: Point::zeros(),
        b: Point::new(0.0, 1.0),
    })
}

/// Largest pointwise errors of `(u_h, q_h, λ_h)`.
pub fn max_errors(mesh: &Mesh, sol: &hdg::FieldSolution, p: &Poly) -> (f64, f64, f64) {
    let k = sol.k();
    let (mut eu, mut eq, mut el) = (0.0f64, 0.0f64, 0.0f64);
    for t in 0..mesh.num_triangles() {
        let (pts, _) = element_rule(k).map(&mesh.triangle_points(t));
        for x in pts {
            eu = eu.max((sol.u(t, x) - p.u(x)).abs());
            eq = eq.max((sol.q(t, x) + p.grad(x)).norm());
        }
    }
    for e in 0..mesh.num_edges() {
        let (a, b) = mesh.edge_points(e);
        for &s in &edge_rule(k).points {
            el = el.max((sol.lambda(e, s) - p.u(a + (b - a) * s)).abs());
        }
    }
    (eu, eq, el)
}

/// Degree-`k` polynomial solved on an `n × n` square grid.
pub fn poly_errors(domain: &DomainSpec, n: usize, k: usize, solver: SolverKind) -> (f64, f64, f64) {
    let mut mesh = generate_square_grid(Point::zeros(), Point::new(1.0, 1.0), n);
    mesh.classify(domain).unwrap();
    let paths = build_paths(&mesh, domain, PathStrategy::P2, k).unwrap();
    let p = Poly::of_degree(k as i32);
    let mut opts = HdgOptions::new(k);
    opts.solver = solver;
    let sol = hdg::solve_problem(&mesh, domain, &paths, &p, &opts).unwrap();
    max_errors(&mesh, &sol, &p)
}

/// Fourth-order central difference of `f` along `dir`.
fn derivative(f: impl Fn(Point) -> f64, x: Point, dir: Point, h: f64) -> f64 {
    (-f(x + dir * 2.0 * h) + 8.0 * f(x + dir * h) - 8.0 * f(x - dir * h) + f(x - dir * 2.0 * h))
        / (12.0 * h)
}

fn samples(c: &ManufacturedCase, region: Region, count: usize, seed: u64) -> Vec<Point> {
    let (lo, hi) = c.domain.bounding_box();
    let margin = 1e-2 * (hi - lo).norm();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let x = Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        let ok = [
            Point::new(1.0, 0.0),
            Point::new(-1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(0.0, -1.0),
        ]
        .iter()
        .all(|d| {
            let y = x + d * margin;
            c.domain.contains(y) && c.domain.region_of(y) == region
        });
        if ok && c.domain.contains(x) && c.domain.region_of(x) == region {
            out.push(x);
        }
    }
    out
}

/// Largest scaled mismatch of `q = -K∇u` and `f = -∇·q` against finite
/// differences at `count` random points per region.
pub fn catalog_mismatch(c: &ManufacturedCase, count: usize) -> f64 {
    let regions: &[Region] = if c.has_interface() {
        &[Region::One, Region::Two]
    } else {
        &[Region::One]
    };
    let h = 1e-4;
    let ex = Point::new(1.0, 0.0);
    let ey = Point::new(0.0, 1.0);
    let mut worst = 0.0f64;
    for (i, &r) in regions.iter().enumerate() {
        let kk = c.domain.conductivity(r);
        for x in samples(c, r, count, 7 + i as u64) {
            let u = |y: Point| c.u(r, y);
            let grad = Point::new(derivative(u, x, ex, h), derivative(u, x, ey, h));
            let q = c.q(r, x);
            worst = worst.max((q + kk * grad).norm() / (1.0 + q.norm()));

            let div = derivative(|y| c.q(r, y).x, x, ex, h) + derivative(|y| c.q(r, y).y, x, ey, h);
            let f = c.f(r, x);
            worst = worst.max((div + f).abs() / (1.0 + f.abs()));
        }
    }
    worst
}
