//! Gauss rules on [0, 1] and collapsed Gauss rules on triangles.

use crate::geometry::Point;

#[derive(Debug, Clone)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LineRule {
    /// `n`-point Gauss-Legendre rule on [0, 1]; exact to degree `2n - 1`.
    pub fn gauss(n: usize) -> Self {
        assert!(n >= 1);
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Tricomi initial guess for the i-th root on [-1, 1], largest first
            let mut x = ((4 * i + 3) as f64 * std::f64::consts::PI / (4 * n + 2) as f64).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            points[n - 1 - i] = 0.5 * (x + 1.0);
            weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
        LineRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative on [-1, 1].
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature on the reference triangle with vertices (0,0), (1,0), (0,1).
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Collapsed (Duffy) product of two `n`-point Gauss rules; exact to degree `2n - 2`.
    pub fn collapsed(n: usize) -> Self {
        let g = LineRule::gauss(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&u, &wu) in g.points.iter().zip(&g.weights) {
            for (&v, &wv) in g.points.iter().zip(&g.weights) {
                points.push([u, v * (1.0 - u)]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        TriangleRule { points, weights }
    }

    /// Rule exact to at least degree `degree`.
    pub fn with_degree(degree: usize) -> Self {
        Self::collapsed(degree.div_ceil(2) + 1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Physical points and weights on the triangle `(a, b, c)`.
    pub fn map(&self, tri: &[Point; 3]) -> (Vec<Point>, Vec<f64>) {
        let e1 = tri[1] - tri[0];
        let e2 = tri[2] - tri[0];
        let jac = (e1.x * e2.y - e1.y * e2.x).abs();
        let pts = self
            .points
            .iter()
            .map(|p| tri[0] + e1 * p[0] + e2 * p[1])
            .collect();
        let w = self.weights.iter().map(|w| w * jac).collect();
        (pts, w)
    }
}

/// Element rule for degree `k`: exact to degree `2k + 2`.
pub fn element_rule(k: usize) -> TriangleRule {
    TriangleRule::collapsed(k + 2)
}

/// Edge rule for degree `k`: `k + 3` Gauss points on [0, 1].
pub fn edge_rule(k: usize) -> LineRule {
    LineRule::gauss(k + 3)
}

/// Rule used for error integrals: two degrees above the element rule.
pub fn error_rule(k: usize) -> TriangleRule {
    TriangleRule::collapsed(k + 3)
}
