//! Manufactured interface problems with known exact solutions.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{edge_intersection, Circle, LevelSet, Point, Side};
use crate::mesh::Rect;

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Point) -> Point + Send + Sync>;

/// Piecewise-constant diffusion coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficient {
    pub minus: f64,
    pub plus: f64,
}

impl Coefficient {
    pub fn new(minus: f64, plus: f64) -> Result<Self> {
        if !(minus > 0.0 && minus.is_finite() && plus > 0.0 && plus.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "coefficients must be positive and finite, got ({minus}, {plus})"
            )));
        }
        Ok(Self { minus, plus })
    }

    /// Value on a side; points on the interface take the larger value.
    pub fn on(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.minus,
            Side::Plus => self.plus,
            Side::OnInterface => self.max(),
        }
    }

    pub fn max(&self) -> f64 {
        self.minus.max(self.plus)
    }

    pub fn min(&self) -> f64 {
        self.minus.min(self.plus)
    }

    pub fn swapped(&self) -> Self {
        Self {
            minus: self.plus,
            plus: self.minus,
        }
    }
}

/// An interface problem `div u = f`, `u = -β∇p` with exact solution.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub domain: Rect,
    pub level_set: Arc<dyn LevelSet>,
    pub beta: Coefficient,
    pub exact_p: ScalarFn,
    pub grad_p: VectorFn,
    pub exact_u: VectorFn,
    pub source: ScalarFn,
    pub dirichlet: ScalarFn,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("level_set", &self.level_set.describe())
            .field("beta", &self.beta)
            .finish()
    }
}

impl ProblemSpec {
    pub fn side(&self, p: Point) -> Side {
        if self.level_set.value(p) < 0.0 {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    pub fn beta_at(&self, p: Point) -> f64 {
        self.beta.on(self.side(p))
    }
}

pub const CIRCLE_RADIUS: f64 = 0.4;

/// Circular interface of radius 0.4 in `[-1, 1]²` with
/// `p = r³/β⁻` inside and `r³/β⁺ + (1/β⁻ - 1/β⁺) r₀³` outside.
pub fn circle_benchmark(beta_minus: f64, beta_plus: f64) -> Result<ProblemSpec> {
    let beta = Coefficient::new(beta_minus, beta_plus)?;
    let ls = Circle::centered(CIRCLE_RADIUS);
    let r0_cubed = CIRCLE_RADIUS.powi(3);
    let p = move |q: Point| {
        let r = q.norm();
        if ls.value(q) < 0.0 {
            r.powi(3) / beta.minus
        } else {
            r.powi(3) / beta.plus + (1.0 / beta.minus - 1.0 / beta.plus) * r0_cubed
        }
    };
    let grad = move |q: Point| {
        let b = if ls.value(q) < 0.0 { beta.minus } else { beta.plus };
        q * (3.0 * q.norm() / b)
    };
    let p: ScalarFn = Arc::new(p);
    Ok(ProblemSpec {
        name: format!("circle(beta-={beta_minus}, beta+={beta_plus})"),
        domain: Rect::default(),
        level_set: Arc::new(ls),
        beta,
        exact_p: p.clone(),
        grad_p: Arc::new(grad),
        exact_u: Arc::new(|q: Point| q * (-3.0 * q.norm())),
        source: Arc::new(|q: Point| -9.0 * q.norm()),
        dirichlet: p,
    })
}

/// Largest relative defects found by [`verify_manufactured`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ManufacturedDefects {
    pub divergence: f64,
    pub constitutive: f64,
    pub value_jump: f64,
    pub flux_jump: f64,
}

impl ManufacturedDefects {
    pub fn max(&self) -> f64 {
        self.divergence.max(self.constitutive).max(self.value_jump).max(self.flux_jump)
    }
}

pub const MANUFACTURED_TOLERANCE: f64 = 1e-6;
const FD_STEP: f64 = 1e-5;

/// Checks the exact fields of `spec` by finite differences at about
/// `samples` interior points and `samples` interface points.
pub fn verify_manufactured(spec: &ProblemSpec, samples: usize) -> Result<ManufacturedDefects> {
    let ls = spec.level_set.as_ref();
    let d = FD_STEP;
    let dom = spec.domain;

    let mut div = Defect::default();
    let mut cons = Defect::default();
    for k in 1..=samples.max(1) {
        let q = Point::new(
            dom.min.x + (dom.max.x - dom.min.x) * halton(k, 2),
            dom.min.y + (dom.max.y - dom.min.y) * halton(k, 3),
        );
        let dist = ls.value(q).abs() / ls.gradient(q).norm().max(f64::MIN_POSITIVE);
        if dist < 10.0 * d {
            continue;
        }
        let u = &spec.exact_u;
        let ex = Point::new(d, 0.0);
        let ey = Point::new(0.0, d);
        let div_u = (u(q + ex).x - u(q - ex).x + u(q + ey).y - u(q - ey).y) / (2.0 * d);
        div.add(div_u, (spec.source)(q));

        let p = &spec.exact_p;
        let grad = Point::new((p(q + ex) - p(q - ex)) / (2.0 * d), (p(q + ey) - p(q - ey)) / (2.0 * d));
        let flux = grad * (-spec.beta_at(q));
        let uq = u(q);
        cons.add(flux.x, uq.x);
        cons.add(flux.y, uq.y);
    }

    let mut jump_p = Defect::default();
    let mut jump_flux = Defect::default();
    for x in interface_points(ls, dom, samples.max(1)) {
        let g = ls.gradient(x);
        let n = g * (1.0 / g.norm());
        let one_sided = |s: f64| {
            let at = |t: f64| (spec.exact_p)(x + n * (s * t));
            let value = 3.0 * at(d) - 3.0 * at(2.0 * d) + at(3.0 * d);
            let slope = |c: f64| s * (at(c + d) - at(c - d)) / (2.0 * d);
            let dn = 2.0 * slope(2.0 * d) - slope(4.0 * d);
            let side = spec.side(x + n * (s * 2.0 * d));
            (value, spec.beta.on(side) * dn)
        };
        let (p_in, f_in) = one_sided(-1.0);
        let (p_out, f_out) = one_sided(1.0);
        jump_p.add(p_in, p_out);
        jump_flux.add(f_in, f_out);
    }

    let defects = ManufacturedDefects {
        divergence: div.relative(),
        constitutive: cons.relative(),
        value_jump: jump_p.relative(),
        flux_jump: jump_flux.relative(),
    };
    for (check, value) in [
        ("div u = f", defects.divergence),
        ("u = -beta grad p", defects.constitutive),
        ("continuity of p across the interface", defects.value_jump),
        ("continuity of the normal flux across the interface", defects.flux_jump),
    ] {
        if !(value <= MANUFACTURED_TOLERANCE) {
            return Err(Error::ManufacturedDefect {
                check: check.to_string(),
                defect: value,
            });
        }
    }
    Ok(defects)
}

#[derive(Default)]
struct Defect {
    max_diff: f64,
    scale: f64,
}

impl Defect {
    fn add(&mut self, a: f64, b: f64) {
        self.max_diff = self.max_diff.max((a - b).abs());
        self.scale = self.scale.max(a.abs()).max(b.abs());
    }

    fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.max_diff / self.scale
        }
    }
}

fn halton(mut k: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while k > 0 {
        f /= base as f64;
        r += f * (k % base) as f64;
        k /= base;
    }
    r
}

/// Interface points found by scanning horizontal lines for sign changes.
fn interface_points(ls: &dyn LevelSet, dom: Rect, wanted: usize) -> Vec<Point> {
    let lines = wanted.max(2);
    let segments = 256;
    let mut out = Vec::new();
    for i in 0..lines {
        let y = dom.min.y + (dom.max.y - dom.min.y) * (i as f64 + 0.5) / lines as f64;
        let mut a = Point::new(dom.min.x, y);
        for j in 1..=segments {
            let b = Point::new(dom.min.x + (dom.max.x - dom.min.x) * j as f64 / segments as f64, y);
            if ls.value(a) * ls.value(b) < 0.0 {
                if let Ok(x) = edge_intersection(ls, a, b) {
                    out.push(x);
                }
            }
            a = b;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_contrast_is_r_cubed() {
        let s = circle_benchmark(1.0, 1.0).unwrap();
        for q in [Point::new(0.1, 0.2), Point::new(0.7, -0.5), Point::new(0.4, 0.0)] {
            assert!(((s.exact_p)(q) - q.norm().powi(3)).abs() < 1e-15);
        }
    }

    #[test]
    fn flux_at_half() {
        let s = circle_benchmark(10.0, 1.0).unwrap();
        // -3 r (x, y) with r = 0.5
        let u = (s.exact_u)(Point::new(0.5, 0.0));
        assert!((u.x + 0.75).abs() < 1e-15 && u.y == 0.0);
    }

    #[test]
    fn continuous_at_interface() {
        let s = circle_benchmark(100.0, 1.0).unwrap();
        let inside = 0.4f64.powi(3) / 100.0;
        let outside = 0.4f64.powi(3) / 1.0 + (1.0 / 100.0 - 1.0) * 0.4f64.powi(3);
        assert!((inside - outside).abs() < 1e-15);
        let x = Point::new(0.4, 0.0);
        assert!(((s.exact_p)(x) - inside).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_coefficient_is_rejected() {
        assert!(circle_benchmark(0.0, 1.0).is_err());
        assert!(circle_benchmark(1.0, -2.0).is_err());
    }

    #[test]
    fn benchmark_passes_finite_differences() {
        for (bm, bp) in [(1.0, 1.0), (100.0, 1.0), (1.0, 1000.0)] {
            let s = circle_benchmark(bm, bp).unwrap();
            let d = verify_manufactured(&s, 64).unwrap();
            assert!(d.max() < 1e-7, "{d:?}");
        }
    }

    #[test]
    fn zero_source_fails() {
        let mut s = circle_benchmark(1.0, 1.0).unwrap();
        s.source = Arc::new(|_| 0.0);
        match verify_manufactured(&s, 32) {
            Err(Error::ManufacturedDefect { check, defect }) => {
                assert_eq!(check, "div u = f");
                assert!((defect - 1.0).abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn swapped_coefficient_fails() {
        let mut s = circle_benchmark(100.0, 1.0).unwrap();
        s.beta = s.beta.swapped();
        assert!(matches!(verify_manufactured(&s, 32), Err(Error::ManufacturedDefect { .. })));
    }

    #[test]
    fn exact_flux_has_no_jump() {
        let s = circle_benchmark(1000.0, 1.0).unwrap();
        for k in 0..50 {
            let a = k as f64 * 0.1257;
            let n = Point::new(a.cos(), a.sin());
            let inside = (s.exact_u)(n * (0.4 - 1e-12));
            let outside = (s.exact_u)(n * (0.4 + 1e-12));
            assert!((inside - outside).norm() < 1e-11);
        }
    }
}
