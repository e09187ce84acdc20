//! Analytic boundary and interface curves.
//!
//! Every curve exposes a signed implicit value `F` that is negative inside the
//! closed curve, zero on it and positive outside. Circles and polygons use the
//! signed Euclidean distance, the ellipse and the kidney use their polynomial
//! level-set forms, and the airfoil (which has no closed implicit form) uses a
//! signed distance computed from its parametric description.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;

/// Number of parametric samples used to seed closest-point projections.
pub const PROJECTION_SAMPLES: usize = 256;
pub const PROJECTION_MAX_ITER: usize = 100;
pub const PROJECTION_TOL: f64 = 1e-12;
/// Segments of the polygon used for the airfoil winding-number test.
pub const AIRFOIL_SEGMENTS: usize = 4096;

const RAY_MARCH_STEPS: usize = 64;

#[derive(Debug, Clone)]
pub enum Curve {
    /// Closed counter-clockwise chain of straight segments.
    Polygon(Polygon),
    Circle {
        center: Point,
        radius: f64,
    },
    Ellipse {
        center: Point,
        a: f64,
        b: f64,
    },
    Kidney(Kidney),
    Airfoil(Airfoil),
}

#[derive(Debug, Clone)]
pub struct Polygon {
    vertices: Vec<Point>,
    cumulative: Vec<f64>,
}

impl Polygon {
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidParameters(
                "a polygon needs at least three vertices".into(),
            ));
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let mut cumulative = Vec::with_capacity(vertices.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 0..vertices.len() {
            acc += (vertices[(i + 1) % vertices.len()] - vertices[i]).norm();
            cumulative.push(acc);
        }
        Ok(Polygon {
            vertices,
            cumulative,
        })
    }

    pub fn rectangle(min: Point, max: Point) -> Self {
        Polygon::new(vec![
            min,
            Point::new(max.x, min.y),
            max,
            Point::new(min.x, max.y),
        ])
        .expect("four vertices")
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    fn segment(&self, i: usize) -> (Point, Point) {
        (
            self.vertices[i],
            self.vertices[(i + 1) % self.vertices.len()],
        )
    }

    fn perimeter(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Closest point, its distance and the index of the segment it lies on.
    fn project(&self, x: Point) -> (Point, f64, usize) {
        let mut best = (self.vertices[0], f64::INFINITY, 0);
        for i in 0..self.vertices.len() {
            let (a, b) = self.segment(i);
            let p = project_on_segment(x, a, b);
            let d = (x - p).norm();
            if d < best.1 {
                best = (p, d, i);
            }
        }
        best
    }

    fn segment_normal(&self, i: usize) -> Point {
        let (a, b) = self.segment(i);
        let t = (b - a).normalize();
        Point::new(t.y, -t.x)
    }

    fn point_at(&self, t: f64) -> Point {
        let s = t.rem_euclid(1.0) * self.perimeter();
        let i = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&s).unwrap())
        {
            Ok(i) => i.min(self.vertices.len() - 1),
            Err(i) => i - 1,
        };
        let (a, b) = self.segment(i);
        let len = self.cumulative[i + 1] - self.cumulative[i];
        a + (b - a) * ((s - self.cumulative[i]) / len)
    }
}

/// The kidney-shaped level set
/// `(2[(x+1/2)^2+y^2] - x - 1/2)^2 - [(x+1/2)^2+y^2] + 1/10 = 0`.
///
/// The enclosed region is star-shaped with respect to `(0.05, 0)`, which gives
/// the parametrization used for meshing and for seeding projections.
#[derive(Debug, Clone, Default)]
pub struct Kidney {
    samples: OnceLock<Vec<Point>>,
}

impl Kidney {
    pub const STAR_CENTER: [f64; 2] = [0.05, 0.0];

    pub fn new() -> Self {
        Kidney::default()
    }

    fn value(x: Point) -> f64 {
        let xs = x.x + 0.5;
        let rho = xs * xs + x.y * x.y;
        let g = 2.0 * rho - xs;
        g * g - rho + 0.1
    }

    fn gradient(x: Point) -> Point {
        let xs = x.x + 0.5;
        let rho = xs * xs + x.y * x.y;
        let g = 2.0 * rho - xs;
        Point::new(
            2.0 * g * (4.0 * xs - 1.0) - 2.0 * xs,
            8.0 * g * x.y - 2.0 * x.y,
        )
    }

    fn hessian(x: Point) -> Matrix2<f64> {
        let xs = x.x + 0.5;
        let rho = xs * xs + x.y * x.y;
        let g = 2.0 * rho - xs;
        let gx = 4.0 * xs - 1.0;
        let fxx = 2.0 * gx * gx + 8.0 * g - 2.0;
        let fxy = 8.0 * x.y * gx;
        let fyy = 32.0 * x.y * x.y + 8.0 * g - 2.0;
        Matrix2::new(fxx, fxy, fxy, fyy)
    }

    fn point_at(t: f64) -> Point {
        let c = Point::new(Self::STAR_CENTER[0], Self::STAR_CENTER[1]);
        let angle = TAU * t;
        let dir = Point::new(angle.cos(), angle.sin());
        let f = |r: f64| Self::value(c + dir * r);
        // The curve lies within distance 1 of the star center.
        let mut lo = 0.0;
        let step = 0.01;
        let mut hi = step;
        while f(hi) < 0.0 {
            lo = hi;
            hi += step;
        }
        let r = brent_root(&f, lo, hi, 1e-16).unwrap_or(0.5 * (lo + hi));
        c + dir * r
    }

    fn samples(&self) -> &[Point] {
        self.samples.get_or_init(|| {
            (0..PROJECTION_SAMPLES)
                .map(|i| Self::point_at(i as f64 / PROJECTION_SAMPLES as f64))
                .collect()
        })
    }
}

/// Joukowsky airfoil: the image of the circle `|z - s| = R` under
/// `J(z) = z + lambda^2 / z` with `lambda = R - |s|`.
#[derive(Debug, Clone)]
pub struct Airfoil {
    radius: f64,
    center: Complex64,
    lambda: f64,
    polygon: Vec<Point>,
    seeds: Vec<Point>,
}

impl Airfoil {
    pub fn new(radius: f64, s1: f64, s2: f64) -> Result<Self> {
        let offset = (s1 * s1 + s2 * s2).sqrt();
        if !(offset > 0.0 && radius > offset) {
            return Err(Error::InvalidParameters(format!(
                "Joukowsky airfoil requires R > sqrt(s1^2 + s2^2) > 0 (R = {radius}, |s| = {offset})"
            )));
        }
        let mut foil = Airfoil {
            radius,
            center: Complex64::new(s1, s2),
            lambda: radius - offset,
            polygon: Vec::new(),
            seeds: Vec::new(),
        };
        foil.polygon = (0..AIRFOIL_SEGMENTS)
            .map(|i| foil.point_at_angle(TAU * i as f64 / AIRFOIL_SEGMENTS as f64))
            .collect();
        foil.seeds = (0..PROJECTION_SAMPLES)
            .map(|i| foil.point_at_angle(TAU * i as f64 / PROJECTION_SAMPLES as f64))
            .collect();
        Ok(foil)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn map(&self, z: Complex64) -> Complex64 {
        z + self.lambda * self.lambda / z
    }

    pub fn map_derivative(&self, z: Complex64) -> Complex64 {
        1.0 - self.lambda * self.lambda / (z * z)
    }

    /// Pre-image of `w` outside the generating circle.
    pub fn inverse(&self, w: Complex64) -> Complex64 {
        let root = (w * w - 4.0 * self.lambda * self.lambda).sqrt();
        let z1 = 0.5 * (w + root);
        let z2 = 0.5 * (w - root);
        if (z1 - self.center).norm() >= (z2 - self.center).norm() {
            z1
        } else {
            z2
        }
    }

    fn circle_point(&self, angle: f64) -> Complex64 {
        self.center + Complex64::from_polar(self.radius, angle)
    }

    pub fn point_at_angle(&self, angle: f64) -> Point {
        let w = self.map(self.circle_point(angle));
        Point::new(w.re, w.im)
    }

    /// Derivative of the parametrization with respect to the angle.
    pub fn tangent_at_angle(&self, angle: f64) -> Point {
        let dz = Complex64::i() * Complex64::from_polar(self.radius, angle);
        let w = self.map_derivative(self.circle_point(angle)) * dz;
        Point::new(w.re, w.im)
    }

    fn normal_at_angle(&self, angle: f64) -> Result<Point> {
        let t = self.tangent_at_angle(angle);
        let n = t.norm();
        if n < 1e-12 {
            let p = self.point_at_angle(angle);
            return Err(Error::DegenerateGradient { x: p.x, y: p.y });
        }
        // counter-clockwise traversal: outward normal is the tangent rotated clockwise
        Ok(Point::new(t.y, -t.x) / n)
    }

    /// Closest point as (angle, point, distance).
    fn project(&self, x: Point) -> (f64, Point, f64) {
        let m = self.seeds.len();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            (self.seeds[a] - x)
                .norm_squared()
                .partial_cmp(&(self.seeds[b] - x).norm_squared())
                .unwrap()
        });
        let spacing = TAU / m as f64;
        let mut best = (0.0, self.seeds[order[0]], f64::INFINITY);
        for &i in order.iter().take(3) {
            let centre = spacing * i as f64;
            let dist2 = |a: f64| (self.point_at_angle(a) - x).norm_squared();
            let a = golden_minimize(&dist2, centre - spacing, centre + spacing, 120);
            let p = self.point_at_angle(a);
            let d = (p - x).norm();
            if d < best.2 {
                best = (a.rem_euclid(TAU), p, d);
            }
        }
        best
    }

    fn winding_contains(&self, x: Point) -> bool {
        winding_number(&self.polygon, x) != 0
    }

    fn signed_distance(&self, x: Point) -> f64 {
        let (angle, p, d) = self.project(x);
        let inside = if d < 1e-3 * self.radius {
            match self.normal_at_angle(angle) {
                Ok(n) => (x - p).dot(&n) < 0.0,
                Err(_) => self.winding_contains(x),
            }
        } else {
            self.winding_contains(x)
        };
        if inside {
            -d
        } else {
            d
        }
    }

    fn ray(&self, x: Point, m: Point, t_max: f64) -> Option<f64> {
        let cross = |a: f64| {
            let d = self.point_at_angle(a) - x;
            d.x * m.y - d.y * m.x
        };
        let n = self.polygon.len();
        let mut best: Option<f64> = None;
        let mut prev = cross(0.0);
        for i in 1..=n {
            let a1 = TAU * i as f64 / n as f64;
            let a0 = TAU * (i - 1) as f64 / n as f64;
            let cur = cross(a1);
            if prev == 0.0 || prev.signum() != cur.signum() {
                if let Some(root) = brent_root(&cross, a0, a1, 1e-16) {
                    let t = (self.point_at_angle(root) - x).dot(&m);
                    if t >= -1e-13 && t <= t_max && best.is_none_or(|b| t < b) {
                        best = Some(t.max(0.0));
                    }
                }
            }
            prev = cur;
        }
        best
    }
}

impl Curve {
    pub fn circle(center: Point, radius: f64) -> Self {
        Curve::Circle { center, radius }
    }

    pub fn ellipse(center: Point, a: f64, b: f64) -> Self {
        Curve::Ellipse { center, a, b }
    }

    pub fn kidney() -> Self {
        Curve::Kidney(Kidney::new())
    }

    pub fn joukowsky_airfoil(radius: f64, s1: f64, s2: f64) -> Result<Self> {
        Airfoil::new(radius, s1, s2).map(Curve::Airfoil)
    }

    /// Signed implicit value, negative inside.
    pub fn implicit_value(&self, x: Point) -> f64 {
        match self {
            Curve::Polygon(p) => {
                let (_, d, _) = p.project(x);
                if winding_number(&p.vertices, x) != 0 {
                    -d
                } else {
                    d
                }
            }
            Curve::Circle { center, radius } => (x - center).norm() - radius,
            Curve::Ellipse { center, a, b } => {
                let u = (x.x - center.x) / a;
                let v = (x.y - center.y) / b;
                u * u + v * v - 1.0
            }
            Curve::Kidney(_) => Kidney::value(x),
            Curve::Airfoil(f) => f.signed_distance(x),
        }
    }

    /// Gradient of the implicit value.
    pub fn gradient(&self, x: Point) -> Point {
        match self {
            Curve::Polygon(p) => {
                let (q, d, i) = p.project(x);
                if d > 1e-14 {
                    let sign = if winding_number(&p.vertices, x) != 0 {
                        -1.0
                    } else {
                        1.0
                    };
                    (x - q) * (sign / d)
                } else {
                    p.segment_normal(i)
                }
            }
            Curve::Circle { center, .. } => {
                let d = x - center;
                let n = d.norm();
                if n == 0.0 {
                    Point::zeros()
                } else {
                    d / n
                }
            }
            Curve::Ellipse { center, a, b } => Point::new(
                2.0 * (x.x - center.x) / (a * a),
                2.0 * (x.y - center.y) / (b * b),
            ),
            Curve::Kidney(_) => Kidney::gradient(x),
            Curve::Airfoil(f) => {
                let (angle, _, _) = f.project(x);
                f.normal_at_angle(angle).unwrap_or_else(|_| Point::zeros())
            }
        }
    }

    fn hessian(&self, x: Point) -> Matrix2<f64> {
        match self {
            Curve::Ellipse { a, b, .. } => Matrix2::new(2.0 / (a * a), 0.0, 0.0, 2.0 / (b * b)),
            Curve::Kidney(_) => Kidney::hessian(x),
            Curve::Circle { center, .. } => {
                let d = x - center;
                let r = d.norm();
                let n = d / r;
                (Matrix2::identity() - n * n.transpose()) / r
            }
            _ => Matrix2::zeros(),
        }
    }

    /// Unit normal pointing out of the region enclosed by the curve, computed
    /// from the normalized gradient of the implicit value. Also meaningful at
    /// points slightly off the curve.
    pub fn outward_normal(&self, x: Point) -> Result<Point> {
        if let Curve::Airfoil(f) = self {
            let (angle, _, _) = f.project(x);
            return f.normal_at_angle(angle);
        }
        let g = self.gradient(x);
        let n = g.norm();
        if n < 1e-12 {
            return Err(Error::DegenerateGradient { x: x.x, y: x.y });
        }
        Ok(g / n)
    }

    /// Parametric point for `t` in `[0, 1)`, counter-clockwise.
    pub fn point_at(&self, t: f64) -> Point {
        match self {
            Curve::Polygon(p) => p.point_at(t),
            Curve::Circle { center, radius } => {
                let a = TAU * t;
                center + Point::new(a.cos(), a.sin()) * *radius
            }
            Curve::Ellipse { center, a, b } => {
                let s = TAU * t;
                center + Point::new(a * s.cos(), b * s.sin())
            }
            Curve::Kidney(_) => Kidney::point_at(t),
            Curve::Airfoil(f) => f.point_at_angle(TAU * t),
        }
    }

    /// Closest point on the curve and the distance to it.
    pub fn closest_point(&self, x: Point) -> Result<(Point, f64)> {
        match self {
            Curve::Polygon(p) => {
                let (q, d, _) = p.project(x);
                Ok((q, d))
            }
            Curve::Circle { center, radius } => {
                let d = x - center;
                let n = d.norm();
                let dir = if n == 0.0 {
                    Point::new(1.0, 0.0)
                } else {
                    d / n
                };
                let q = center + dir * *radius;
                Ok((q, (n - radius).abs()))
            }
            Curve::Ellipse { .. } => {
                let seeds: Vec<Point> = (0..PROJECTION_SAMPLES)
                    .map(|i| self.point_at(i as f64 / PROJECTION_SAMPLES as f64))
                    .collect();
                self.project_implicit(x, &seeds)
            }
            Curve::Kidney(k) => self.project_implicit(x, k.samples()),
            Curve::Airfoil(f) => {
                let (_, p, d) = f.project(x);
                Ok((p, d))
            }
        }
    }

    /// Damped Newton iteration on the stationarity conditions of
    /// `min |y - x|^2` subject to `F(y) = 0`, seeded from the nearest samples.
    fn project_implicit(&self, x: Point, seeds: &[Point]) -> Result<(Point, f64)> {
        let mut order: Vec<usize> = (0..seeds.len()).collect();
        order.sort_by(|&a, &b| {
            (seeds[a] - x)
                .norm_squared()
                .partial_cmp(&(seeds[b] - x).norm_squared())
                .unwrap()
        });
        let mut best: Option<(Point, f64)> = None;
        for &i in order.iter().take(3) {
            if let Some(y) = self.lagrange_newton(x, seeds[i]) {
                let d = (y - x).norm();
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((y, d));
                }
            }
        }
        best.ok_or(Error::ProjectionDiverged {
            x: x.x,
            y: x.y,
            iterations: PROJECTION_MAX_ITER,
        })
    }

    fn lagrange_newton(&self, x: Point, seed: Point) -> Option<Point> {
        let residual = |y: Point, mu: f64| -> Vector3<f64> {
            let g = self.gradient(y);
            let r = y - x + g * mu;
            Vector3::new(r.x, r.y, self.implicit_value(y))
        };
        let mut y = seed;
        let g = self.gradient(y);
        let mut mu = (x - y).dot(&g) / g.norm_squared().max(1e-300);
        let scale = 1.0 + x.norm();
        let mut r = residual(y, mu);
        for _ in 0..PROJECTION_MAX_ITER {
            if r.xy().norm() <= PROJECTION_TOL * scale && r.z.abs() <= PROJECTION_TOL {
                return Some(y);
            }
            let g = self.gradient(y);
            let h = self.hessian(y) * mu + Matrix2::identity();
            let jac = Matrix3::new(
                h[(0, 0)],
                h[(0, 1)],
                g.x,
                h[(1, 0)],
                h[(1, 1)],
                g.y,
                g.x,
                g.y,
                0.0,
            );
            let step = jac.lu().solve(&(-r))?;
            let mut alpha = 1.0;
            let norm0 = r.norm();
            loop {
                let yn = y + step.xy() * alpha;
                let mn = mu + step.z * alpha;
                let rn = residual(yn, mn);
                if rn.norm() < (1.0 - 1e-4 * alpha) * norm0 || alpha < 1e-6 {
                    y = yn;
                    mu = mn;
                    r = rn;
                    break;
                }
                alpha *= 0.5;
            }
        }
        if r.z.abs() <= 1e-10 && r.xy().norm() <= 1e-9 * scale {
            Some(y)
        } else {
            None
        }
    }

    /// First intersection `x + t m`, `0 <= t <= t_max`, of the ray with the curve.
    pub fn ray_intersection(&self, x: Point, m: Point, t_max: f64) -> Result<Point> {
        let miss = || Error::NoIntersection {
            x: x.x,
            y: x.y,
            mx: m.x,
            my: m.y,
            t_max,
        };
        let t = match self {
            Curve::Circle { center, radius } => {
                let d = x - center;
                let b = m.dot(&d);
                let c = d.norm_squared() - radius * radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    return Err(miss());
                }
                let s = disc.sqrt();
                // numerically stable pair of roots
                let (t1, t2) = if b > 0.0 {
                    let q = -b - s;
                    (q, if q != 0.0 { c / q } else { 0.0 })
                } else {
                    let q = -b + s;
                    (if q != 0.0 { c / q } else { 0.0 }, q)
                };
                let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
                let tol = 1e-14 * (1.0 + radius);
                if lo >= -tol && lo <= t_max {
                    lo.max(0.0)
                } else if hi >= -tol && hi <= t_max {
                    hi.max(0.0)
                } else {
                    return Err(miss());
                }
            }
            Curve::Polygon(p) => {
                let mut best: Option<f64> = None;
                for i in 0..p.vertices.len() {
                    let (a, b) = p.segment(i);
                    if let Some(t) = ray_segment(x, m, a, b) {
                        if t <= t_max && best.is_none_or(|bt| t < bt) {
                            best = Some(t);
                        }
                    }
                }
                best.ok_or_else(miss)?
            }
            Curve::Ellipse { .. } | Curve::Kidney(_) => {
                let f = |t: f64| self.implicit_value(x + m * t);
                let f0 = f(0.0);
                if f0.abs() <= 1e-15 {
                    0.0
                } else {
                    let mut found = None;
                    let mut t_prev = 0.0;
                    let mut f_prev = f0;
                    for i in 1..=RAY_MARCH_STEPS {
                        let t = t_max * i as f64 / RAY_MARCH_STEPS as f64;
                        let ft = f(t);
                        if ft == 0.0 {
                            found = Some(t);
                            break;
                        }
                        if ft.signum() != f_prev.signum() {
                            found = brent_root(&f, t_prev, t, 1e-16);
                            break;
                        }
                        t_prev = t;
                        f_prev = ft;
                    }
                    found.ok_or_else(miss)?
                }
            }
            Curve::Airfoil(f) => f.ray(x, m, t_max).ok_or_else(miss)?,
        };
        Ok(x + m * t)
    }

    /// Nearest intersection of the full line `x + t n`, `|t| <= t_max`.
    pub fn line_intersection(&self, x: Point, n: Point, t_max: f64) -> Result<Point> {
        let forward = self.ray_intersection(x, n, t_max);
        let backward = self.ray_intersection(x, -n, t_max);
        match (forward, backward) {
            (Ok(a), Ok(b)) => Ok(if (a - x).norm() <= (b - x).norm() {
                a
            } else {
                b
            }),
            (Ok(a), Err(_)) => Ok(a),
            (Err(_), Ok(b)) => Ok(b),
            (Err(e), Err(_)) => Err(e),
        }
    }

    /// Axis-aligned bounding box (min, max).
    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            Curve::Circle { center, radius } => (
                center - Point::new(*radius, *radius),
                center + Point::new(*radius, *radius),
            ),
            Curve::Ellipse { center, a, b } => {
                (center - Point::new(*a, *b), center + Point::new(*a, *b))
            }
            Curve::Polygon(p) => bbox(p.vertices.iter().copied()),
            Curve::Kidney(k) => {
                let (lo, hi) = bbox(k.samples().iter().copied());
                let pad = Point::new(0.02, 0.02);
                (lo - pad, hi + pad)
            }
            Curve::Airfoil(f) => bbox(f.polygon.iter().copied()),
        }
    }

    /// Length of the curve, from a fine polygonal approximation when needed.
    pub fn perimeter(&self) -> f64 {
        match self {
            Curve::Circle { radius, .. } => TAU * radius,
            Curve::Polygon(p) => p.perimeter(),
            Curve::Airfoil(f) => closed_length(&f.polygon),
            _ => {
                let pts: Vec<Point> = (0..2048)
                    .map(|i| self.point_at(i as f64 / 2048.0))
                    .collect();
                closed_length(&pts)
            }
        }
    }

    /// Corner points that must appear as mesh vertices (polygons only).
    pub fn corners(&self) -> &[Point] {
        match self {
            Curve::Polygon(p) => &p.vertices,
            _ => &[],
        }
    }
}

/// Which side of a boundary curve the domain occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Inside,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

/// Partition of a boundary component into its Dirichlet and Neumann parts.
#[derive(Debug, Clone)]
pub enum BcRule {
    Uniform(BcKind),
    /// Points within `1e-9` of the segment `[a, b]` are Neumann, the rest Dirichlet.
    NeumannOnSegment {
        a: Point,
        b: Point,
    },
}

impl BcRule {
    pub fn classify(&self, x: Point) -> BcKind {
        match self {
            BcRule::Uniform(kind) => *kind,
            BcRule::NeumannOnSegment { a, b } => {
                if (x - project_on_segment(x, *a, *b)).norm() <= 1e-9 {
                    BcKind::Neumann
                } else {
                    BcKind::Dirichlet
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryPart {
    pub curve: Curve,
    pub side: Side,
    pub rule: BcRule,
}

impl BoundaryPart {
    pub fn new(curve: Curve, side: Side, rule: BcRule) -> Self {
        BoundaryPart { curve, side, rule }
    }

    /// Negative inside the domain side of this boundary component.
    pub fn domain_value(&self, x: Point) -> f64 {
        match self.side {
            Side::Inside => self.curve.implicit_value(x),
            Side::Outside => -self.curve.implicit_value(x),
        }
    }

    /// Unit normal pointing out of the domain.
    pub fn outward_normal(&self, x: Point) -> Result<Point> {
        let n = self.curve.outward_normal(x)?;
        Ok(match self.side {
            Side::Inside => n,
            Side::Outside => -n,
        })
    }
}

/// Subdomain label. `One` is the region enclosed by the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    One,
    Two,
}

impl Region {
    pub fn index(self) -> usize {
        match self {
            Region::One => 0,
            Region::Two => 1,
        }
    }

    pub fn label(self) -> u8 {
        match self {
            Region::One => 1,
            Region::Two => 2,
        }
    }

    pub fn from_label(label: u8) -> Option<Region> {
        match label {
            1 => Some(Region::One),
            2 => Some(Region::Two),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DomainSpec {
    pub boundary: Vec<BoundaryPart>,
    pub interface: Option<Curve>,
    /// Diffusion tensor in region one and region two.
    pub conductivity: [Matrix2<f64>; 2],
}

impl DomainSpec {
    pub fn new(boundary: Vec<BoundaryPart>) -> Self {
        DomainSpec {
            boundary,
            interface: None,
            conductivity: [Matrix2::identity(), Matrix2::identity()],
        }
    }

    pub fn with_interface(mut self, interface: Curve) -> Self {
        self.interface = Some(interface);
        self
    }

    pub fn with_conductivity(mut self, k1: Matrix2<f64>, k2: Matrix2<f64>) -> Self {
        self.conductivity = [k1, k2];
        self
    }

    /// Checks that every conductivity tensor is symmetric positive definite.
    pub fn validate(&self) -> Result<()> {
        for (i, k) in self.conductivity.iter().enumerate() {
            if (k[(0, 1)] - k[(1, 0)]).abs() > 1e-14 * k.norm() {
                return Err(Error::InvalidParameters(format!(
                    "conductivity of region {} is not symmetric",
                    i + 1
                )));
            }
            let eig = k.symmetric_eigenvalues();
            if eig.iter().any(|&l| l <= 0.0) {
                return Err(Error::InvalidParameters(format!(
                    "conductivity of region {} is not positive definite",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Negative strictly inside the domain.
    pub fn domain_value(&self, x: Point) -> f64 {
        self.boundary
            .iter()
            .map(|b| b.domain_value(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: Point) -> bool {
        self.domain_value(x) < 0.0
    }

    pub fn region_of(&self, x: Point) -> Region {
        match &self.interface {
            Some(c) if c.implicit_value(x) >= 0.0 => Region::Two,
            Some(_) => Region::One,
            None => Region::One,
        }
    }

    pub fn conductivity(&self, region: Region) -> Matrix2<f64> {
        self.conductivity[region.index()]
    }

    /// Bounding box of the boundary components that enclose the domain.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for b in self.boundary.iter().filter(|b| b.side == Side::Inside) {
            let (l, h) = b.curve.bounding_box();
            lo = lo.inf(&l);
            hi = hi.sup(&h);
        }
        (lo, hi)
    }
}

pub(crate) fn project_on_segment(x: Point, a: Point, b: Point) -> Point {
    let d = b - a;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return a;
    }
    let t = ((x - a).dot(&d) / len2).clamp(0.0, 1.0);
    a + d * t
}

fn ray_segment(x: Point, m: Point, a: Point, b: Point) -> Option<f64> {
    let d = b - a;
    let denom = m.x * d.y - m.y * d.x;
    let ax = a - x;
    if denom.abs() < 1e-300 {
        // parallel: only report a hit when the origin lies on the segment
        let on = (x - project_on_segment(x, a, b)).norm() <= 1e-14;
        return on.then_some(0.0);
    }
    let t = (ax.x * d.y - ax.y * d.x) / denom;
    let s = (ax.x * m.y - ax.y * m.x) / denom;
    let eps = 1e-12;
    if t >= -1e-14 && s >= -eps && s <= 1.0 + eps {
        Some(t.max(0.0))
    } else {
        None
    }
}

pub(crate) fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            a.x * b.y - a.y * b.x
        })
        .sum::<f64>()
}

pub(crate) fn winding_number(poly: &[Point], x: Point) -> i32 {
    let n = poly.len();
    let mut wn = 0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let is_left = (b.x - a.x) * (x.y - a.y) - (x.x - a.x) * (b.y - a.y);
        if a.y <= x.y {
            if b.y > x.y && is_left > 0.0 {
                wn += 1;
            }
        } else if b.y <= x.y && is_left < 0.0 {
            wn -= 1;
        }
    }
    wn
}

fn bbox(points: impl Iterator<Item = Point>) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for p in points {
        lo = lo.inf(&p);
        hi = hi.sup(&p);
    }
    (lo, hi)
}

fn closed_length(points: &[Point]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| (points[(i + 1) % n] - points[i]).norm())
        .sum()
}

/// Brent's method on a sign-changing bracket.
pub(crate) fn brent_root(f: &dyn Fn(f64) -> f64, a: f64, b: f64, xtol: f64) -> Option<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Some(b)
}

/// Golden-section minimization on `[a, b]`.
pub(crate) fn golden_minimize(f: &dyn Fn(f64) -> f64, a: f64, b: f64, iterations: usize) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (a, b);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iterations {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
