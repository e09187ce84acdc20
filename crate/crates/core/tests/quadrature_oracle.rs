use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use curved_hdg::geometry::Point;
use curved_hdg::quadrature::{edge_rule, element_rule, error_rule, LineRule, TriangleRule};

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `∫ x^a y^b` over the reference triangle is `a! b! / (a + b + 2)!`.
fn reference_moment(a: u32, b: u32) -> f64 {
    factorial(a) * factorial(b) / factorial(a + b + 2)
}

#[test]
fn reference_area_is_one_half() {
    for k in 0..4 {
        let s: f64 = element_rule(k).weights.iter().sum();
        assert!((s - 0.5).abs() < 1e-15);
    }
}

#[test]
fn monomials_match_the_beta_function_formula() {
    for degree in 0..12usize {
        let rule = TriangleRule::with_degree(degree);
        for a in 0..=degree as u32 {
            let b = degree as u32 - a;
            let q: f64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                .sum();
            let exact = reference_moment(a, b);
            assert!(
                (q - exact).abs() <= 1e-14 * exact.max(1e-3),
                "x^{a} y^{b}: {q} vs {exact}"
            );
        }
    }
}

#[test]
fn stated_exactness_degrees() {
    for k in 0..4 {
        for (rule, degree) in [(element_rule(k), 2 * k + 2), (error_rule(k), 2 * k + 4)] {
            for a in 0..=degree as u32 {
                let b = degree as u32 - a;
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                    .sum();
                assert!((q - reference_moment(a, b)).abs() < 1e-15);
            }
        }
        let e = edge_rule(k);
        for d in 0..(2 * (k + 3)) as i32 {
            assert!((e.integrate(|s| s.powi(d)) - 1.0 / f64::from(d + 1)).abs() < 1e-15);
        }
    }
}

#[test]
fn triangle_rule_agrees_with_monte_carlo() {
    let tri = [
        Point::new(0.2, -0.1),
        Point::new(1.3, 0.4),
        Point::new(0.1, 1.1),
    ];
    let f = |x: Point| x.x.powi(3) * x.y.powi(2);
    let (pts, wts) = element_rule(2).map(&tri);
    let quad: f64 = pts.iter().zip(&wts).map(|(x, w)| w * f(*x)).sum();

    let area = 0.5 * ((tri[1] - tri[0]).perp(&(tri[2] - tri[0]))).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let n = 1_000_000;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n {
        let (mut s, mut t): (f64, f64) = (rng.random(), rng.random());
        if s + t > 1.0 {
            s = 1.0 - s;
            t = 1.0 - t;
        }
        let v = f(tri[0] + (tri[1] - tri[0]) * s + (tri[2] - tri[0]) * t);
        sum += v;
        sum2 += v * v;
    }
    let mean = sum / n as f64;
    let stderr = area * ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
    let mc = area * mean;
    assert!((quad - mc).abs() < 1e-3);
    assert!(
        (quad - mc).abs() < 5.0 * stderr,
        "quadrature {quad}, Monte Carlo {mc} ± {stderr}"
    );
}

#[test]
fn gauss_line_rule_integrates_smooth_functions() {
    let r = LineRule::gauss(12);
    assert!((r.integrate(|s| (3.0 * s).exp()) - ((3.0f64).exp() - 1.0) / 3.0).abs() < 1e-14);
}
