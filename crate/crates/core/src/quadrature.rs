//! Triangle and line quadrature rules.

use std::sync::OnceLock;

use crate::geometry::{triangle_area, Point};

/// Quadrature rule on a triangle in barycentric coordinates; weights sum to 1.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<([f64; 3], f64)>,
    pub degree: usize,
}

impl TriangleRule {
    /// 3-point rule, exact for quadratics.
    pub fn degree2() -> Self {
        let a = 2.0 / 3.0;
        let b = 1.0 / 6.0;
        Self {
            points: vec![([a, b, b], 1.0 / 3.0), ([b, a, b], 1.0 / 3.0), ([b, b, a], 1.0 / 3.0)],
            degree: 2,
        }
    }

    /// 6-point symmetric rule, exact for quartics.
    pub fn degree4() -> Self {
        let (w1, a1, b1) = (0.223_381_589_678_011, 0.108_103_018_168_070, 0.445_948_490_915_965);
        let (w2, a2, b2) = (0.109_951_743_655_322, 0.816_847_572_980_459, 0.091_576_213_509_771);
        let mut points = Vec::with_capacity(6);
        for (w, a, b) in [(w1, a1, b1), (w2, a2, b2)] {
            points.push(([a, b, b], w));
            points.push(([b, a, b], w));
            points.push(([b, b, a], w));
        }
        Self { points, degree: 4 }
    }

    /// Collapsed (Duffy) tensor Gauss rule exact for polynomials of the
    /// given total degree.
    pub fn collapsed(degree: usize) -> Self {
        let n = (degree + 3) / 2;
        let g = gauss_legendre_unit(n);
        let mut points = Vec::with_capacity(n * n);
        for &(u, wu) in &g {
            for &(v, wv) in &g {
                // x = u, y = v (1 - u), Jacobian (1 - u); reference area 1/2
                let x = u;
                let y = v * (1.0 - u);
                points.push(([1.0 - x - y, x, y], 2.0 * wu * wv * (1.0 - u)));
            }
        }
        Self { points, degree }
    }

    pub fn for_degree(degree: usize) -> Self {
        match degree {
            0..=2 => Self::degree2(),
            3..=4 => Self::degree4(),
            d => Self::collapsed(d),
        }
    }

    /// Physical quadrature points and weights (weights include the area).
    pub fn mapped(&self, tri: [Point; 3]) -> impl Iterator<Item = (Point, f64)> + '_ {
        let area = triangle_area(tri[0], tri[1], tri[2]).abs();
        self.points.iter().map(move |&(l, w)| {
            let p = Point::new(
                l[0] * tri[0].x + l[1] * tri[1].x + l[2] * tri[2].x,
                l[0] * tri[0].y + l[1] * tri[1].y + l[2] * tri[2].y,
            );
            (p, w * area)
        })
    }

    pub fn integrate<F: FnMut(Point) -> f64>(&self, tri: [Point; 3], mut f: F) -> f64 {
        self.mapped(tri).map(|(p, w)| w * f(p)).sum()
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    static CACHE: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| (0..=CACHED_RULES).map(|k| if k == 0 { Vec::new() } else { compute_gauss_legendre(k) }).collect());
    match cache.get(n) {
        Some(rule) if n > 0 => rule.clone(),
        _ => compute_gauss_legendre(n),
    }
}

const CACHED_RULES: usize = 12;

fn compute_gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Newton iteration from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Gauss rule on a segment: `(point, weight)` with weights summing to the
/// segment length.
pub fn segment_points(a: Point, b: Point, n: usize) -> Vec<(Point, f64)> {
    let len = a.dist(b);
    gauss_legendre_unit(n)
        .into_iter()
        .map(|(t, w)| (a.lerp(b, t), w * len))
        .collect()
}

/// Gauss points on an edge, split at `split` when present. Each entry also
/// carries the index of the sub-segment (0 next to `a`, 1 next to `b`).
pub fn edge_points(a: Point, b: Point, split: Option<Point>, n: usize) -> Vec<(Point, f64, usize)> {
    match split {
        None => segment_points(a, b, n).into_iter().map(|(p, w)| (p, w, 0)).collect(),
        Some(s) => segment_points(a, s, n)
            .into_iter()
            .map(|(p, w)| (p, w, 0))
            .chain(segment_points(s, b, n).into_iter().map(|(p, w)| (p, w, 1)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> [Point; 3] {
        [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]
    }

    /// ∫ x^i y^j over the reference triangle = i! j! / (i + j + 2)!
    fn monomial_exact(i: u32, j: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        fact(i) * fact(j) / fact(i + j + 2)
    }

    #[test]
    fn weights_sum_to_one() {
        for rule in [TriangleRule::degree2(), TriangleRule::degree4(), TriangleRule::collapsed(9)] {
            let s: f64 = rule.points.iter().map(|p| p.1).sum();
            assert!((s - 1.0).abs() < 1e-14, "degree {}", rule.degree);
        }
    }

    #[test]
    fn area_of_any_triangle() {
        let tri = [Point::new(0.3, -0.2), Point::new(1.7, 0.4), Point::new(0.1, 2.0)];
        let area = triangle_area(tri[0], tri[1], tri[2]);
        let got = TriangleRule::degree2().integrate(tri, |_| 1.0);
        assert!((got - area).abs() < 1e-14);
    }

    #[test]
    fn x_squared_on_reference() {
        let got = TriangleRule::degree2().integrate(reference(), |p| p.x * p.x);
        assert!((got - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn rules_are_exact_to_their_degree() {
        for rule in [
            TriangleRule::degree2(),
            TriangleRule::degree4(),
            TriangleRule::collapsed(6),
            TriangleRule::collapsed(8),
        ] {
            let d = rule.degree as u32;
            for i in 0..=d {
                for j in 0..=(d - i) {
                    let got = rule.integrate(reference(), |p| p.x.powi(i as i32) * p.y.powi(j as i32));
                    let exact = monomial_exact(i, j);
                    assert!(
                        (got - exact).abs() < 1e-13,
                        "degree {} monomial x^{i} y^{j}: {got} vs {exact}",
                        rule.degree
                    );
                }
            }
        }
    }

    #[test]
    fn gauss_two_point_is_exact_for_cubics() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(3.0, 4.0);
        let len = 5.0;
        // ∫ s(1-s)|e| ds over the unit parameter = |e| / 6
        let got: f64 = segment_points(a, b, 2)
            .iter()
            .map(|(p, w)| {
                let s = p.dist(a) / len;
                w * s * (1.0 - s)
            })
            .sum();
        assert!((got - len / 6.0).abs() < 1e-14);
        let cubic: f64 = segment_points(a, b, 2)
            .iter()
            .map(|(p, w)| {
                let s = p.dist(a) / len;
                w * s * s * s
            })
            .sum();
        assert!((cubic - len / 4.0).abs() < 1e-14);
    }

    #[test]
    fn split_edge_piecewise_constant() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(2.0, 0.0);
        let s = Point::new(0.3, 0.0);
        let got: f64 = edge_points(a, b, Some(s), 2)
            .iter()
            .map(|&(_, w, seg)| w * if seg == 0 { 4.0 } else { -1.5 })
            .sum();
        assert!((got - (4.0 * 0.3 - 1.5 * 1.7)).abs() < 1e-14);
        let len: f64 = edge_points(a, b, None, 2).iter().map(|e| e.1).sum();
        assert!((len - 2.0).abs() < 1e-15);
    }
}
