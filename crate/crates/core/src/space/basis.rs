use crate::error::{Error, Result};
use crate::geometry::{Point, Side};
use crate::linalg::{DenseMatrix, DenseSolver};
use crate::problems::Coefficient;

use super::cut::CutElement;

/// Condition estimates above this reject the immersed basis system.
pub const MAX_BASIS_CONDITION: f64 = 1e14;

/// `a + b x + c y`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LinearFn {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LinearFn {
    pub fn eval(&self, p: Point) -> f64 {
        self.a + self.b * p.x + self.c * p.y
    }

    pub fn grad(&self) -> Point {
        Point::new(self.b, self.c)
    }
}

/// Barycentric coordinates of a triangle as linear functions.
pub fn barycentric_functions(tri: &[Point; 3]) -> [LinearFn; 3] {
    let det = (tri[1] - tri[0]).cross(tri[2] - tri[0]);
    std::array::from_fn(|j| {
        let p = tri[(j + 1) % 3];
        let q = tri[(j + 2) % 3];
        // λ_j vanishes on the edge p-q and equals 1 at tri[j]
        LinearFn {
            a: p.cross(q) / det,
            b: (p.y - q.y) / det,
            c: (q.x - p.x) / det,
        }
    })
}

/// Immersed piecewise-linear shape functions on a cut triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct IfemLocalBasis {
    /// `funcs[j][side.index()]` is the piece of λ̂_j on that side.
    pub funcs: [[LinearFn; 2]; 3],
    pub beta: Coefficient,
    pub cut: CutElement,
}

impl IfemLocalBasis {
    pub fn piece(&self, j: usize, side: Side) -> &LinearFn {
        &self.funcs[j][side.index()]
    }
}

/// Solves the 6×6 nodal / continuity / flux-continuity system for each of the
/// three vertex functions.
pub fn build_local_basis(tri: &[Point; 3], cut: &CutElement, beta: Coefficient) -> Result<IfemLocalBasis> {
    // scaled local coordinates keep the system well conditioned for small h
    let origin = tri[0];
    let scale = tri[0].dist(tri[1]).max(tri[1].dist(tri[2])).max(tri[2].dist(tri[0]));
    let local = |p: Point| (p - origin) * (1.0 / scale);

    // unknowns: (a-, b-, c-, a+, b+, c+)
    let mut m = DenseMatrix::zeros(6, 6);
    for (i, &v) in tri.iter().enumerate() {
        let q = local(v);
        let off = 3 * cut.vertex_sides[i].index();
        m.set(i, off, 1.0);
        m.set(i, off + 1, q.x);
        m.set(i, off + 2, q.y);
    }
    for (row, e) in [(3, cut.segment.e1), (4, cut.segment.e2)] {
        let q = local(e);
        for (k, v) in [1.0, q.x, q.y].into_iter().enumerate() {
            m.set(row, k, v);
            m.set(row, 3 + k, -v);
        }
    }
    let n = cut.segment.normal();
    let bmax = beta.max();
    m.set(5, 1, beta.minus / bmax * n.x);
    m.set(5, 2, beta.minus / bmax * n.y);
    m.set(5, 4, -beta.plus / bmax * n.x);
    m.set(5, 5, -beta.plus / bmax * n.y);

    let solver = DenseSolver::factor(&m).map_err(|_| Error::SingularBasisSystem { condition: f64::INFINITY })?;
    let condition = solver.condition();
    if !(condition <= MAX_BASIS_CONDITION) {
        return Err(Error::SingularBasisSystem { condition });
    }

    let mut funcs = [[LinearFn::default(); 2]; 3];
    for (j, f) in funcs.iter_mut().enumerate() {
        let mut rhs = [0.0; 6];
        rhs[j] = 1.0;
        let x = solver.solve(&rhs);
        for side in 0..2 {
            let (a, b, c) = (x[3 * side], x[3 * side + 1] / scale, x[3 * side + 2] / scale);
            f[side] = LinearFn {
                a: a - b * origin.x - c * origin.y,
                b,
                c,
            };
        }
    }
    Ok(IfemLocalBasis {
        funcs,
        beta,
        cut: cut.clone(),
    })
}

/// Largest violation of the defining conditions, each measured on its
/// natural scale (flux relative to `max β / h`).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BasisResiduals {
    pub nodal: f64,
    pub continuity: f64,
    pub flux: f64,
    pub partition_of_unity: f64,
}

impl BasisResiduals {
    pub fn max(&self) -> f64 {
        self.nodal.max(self.continuity).max(self.flux).max(self.partition_of_unity)
    }
}

pub fn basis_residuals(tri: &[Point; 3], basis: &IfemLocalBasis) -> BasisResiduals {
    let cut = &basis.cut;
    let h = tri[0].dist(tri[1]).max(tri[1].dist(tri[2])).max(tri[2].dist(tri[0]));
    let n = cut.segment.normal();
    let mut r = BasisResiduals::default();
    for j in 0..3 {
        for (i, &v) in tri.iter().enumerate() {
            let value = basis.piece(j, cut.vertex_sides[i]).eval(v);
            let target = if i == j { 1.0 } else { 0.0 };
            r.nodal = r.nodal.max((value - target).abs());
        }
        let minus = basis.piece(j, Side::Minus);
        let plus = basis.piece(j, Side::Plus);
        for e in [cut.segment.e1, cut.segment.e2] {
            r.continuity = r.continuity.max((minus.eval(e) - plus.eval(e)).abs());
        }
        let jump = basis.beta.minus * minus.grad().dot(n) - basis.beta.plus * plus.grad().dot(n);
        r.flux = r.flux.max(jump.abs() / (basis.beta.max() / h));
    }
    for side in [Side::Minus, Side::Plus] {
        let (a, b, c) = (0..3).fold((0.0, 0.0, 0.0), |acc, j| {
            let f = basis.piece(j, side);
            (acc.0 + f.a, acc.1 + f.b, acc.2 + f.c)
        });
        let defect = (a - 1.0).abs().max(b.abs() * h).max(c.abs() * h);
        r.partition_of_unity = r.partition_of_unity.max(defect);
    }
    r
}
