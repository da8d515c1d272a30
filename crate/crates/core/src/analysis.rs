//! Error norms against exact solutions, convergence orders and report tables.

use std::fmt::Write as _;

use crate::assembly::edge_quadrature;
use crate::error::{Error, Result};
use crate::flux::RecoveredFlux;
use crate::geometry::Point;
use crate::problems::ProblemSpec;
use crate::quadrature::TriangleRule;
use crate::space::{DiscreteField, EnrichedSpace};

/// Default exactness degree of the error quadrature.
pub const ERROR_DEGREE: usize = 4;
/// Gauss points per segment for edge terms of the energy norm.
const ERROR_EDGE_POINTS: usize = 4;

/// `‖p - p_h‖₀` with the default rule.
pub fn error_l2(space: &EnrichedSpace<'_>, field: &DiscreteField, exact: &dyn Fn(Point) -> f64) -> f64 {
    error_l2_with(space, field, exact, &TriangleRule::for_degree(ERROR_DEGREE))
}

/// `‖p - p_h‖₀` on the sub-triangulation. The exact solution picks its own
/// side; `p_h` uses the side of the sub-triangle.
pub fn error_l2_with(space: &EnrichedSpace<'_>, field: &DiscreteField, exact: &dyn Fn(Point) -> f64, rule: &TriangleRule) -> f64 {
    let mut sum = 0.0;
    for t in 0..space.n_elements() {
        for sub in space.sub_triangles(t) {
            sum += rule.integrate(sub.vertices, |p| {
                let d = exact(p) - field.value_on(space, t, p, sub.side);
                d * d
            });
        }
    }
    sum.sqrt()
}

/// Broken norm `⦀p - p_h⦀_h`: full `H¹` part per element plus
/// `Σ_e |e|⁻¹ ∫_e ⟦p - p_h⟧²` (boundary edges compare with `g`).
pub fn error_energy(space: &EnrichedSpace<'_>, field: &DiscreteField, problem: &ProblemSpec) -> f64 {
    error_energy_with(
        space,
        field,
        problem.exact_p.as_ref(),
        problem.grad_p.as_ref(),
        problem.dirichlet.as_ref(),
        &TriangleRule::for_degree(ERROR_DEGREE),
    )
}

pub fn error_energy_with(
    space: &EnrichedSpace<'_>,
    field: &DiscreteField,
    exact: &dyn Fn(Point) -> f64,
    grad: &dyn Fn(Point) -> Point,
    dirichlet: &dyn Fn(Point) -> f64,
    rule: &TriangleRule,
) -> f64 {
    let mut sum = 0.0;
    for t in 0..space.n_elements() {
        for sub in space.sub_triangles(t) {
            sum += rule.integrate(sub.vertices, |p| {
                let d = exact(p) - field.value_on(space, t, p, sub.side);
                let g = grad(p) - field.gradient_on(space, t, p, sub.side);
                d * d + g.dot(g)
            });
        }
    }
    for (e, edge) in space.mesh().edges().iter().enumerate() {
        let mut s = 0.0;
        for (p, w) in edge_quadrature(space, e, ERROR_EDGE_POINTS) {
            let owner = field.value(space, edge.owner, p);
            let other = match edge.neighbor {
                Some(t) => field.value(space, t, p),
                None => dirichlet(p),
            };
            s += w * (owner - other).powi(2);
        }
        sum += s / edge.length;
    }
    sum.sqrt()
}

/// `(‖u - u_h‖₀, ‖div(u - u_h)‖₀)` with `div u = f`.
pub fn error_flux(space: &EnrichedSpace<'_>, flux: &RecoveredFlux, exact_u: &dyn Fn(Point) -> Point, source: &dyn Fn(Point) -> f64) -> (f64, f64) {
    error_flux_with(space, flux, exact_u, source, &TriangleRule::for_degree(ERROR_DEGREE))
}

pub fn error_flux_with(
    space: &EnrichedSpace<'_>,
    flux: &RecoveredFlux,
    exact_u: &dyn Fn(Point) -> Point,
    source: &dyn Fn(Point) -> f64,
    rule: &TriangleRule,
) -> (f64, f64) {
    let mesh = space.mesh();
    let (mut l2, mut hdiv) = (0.0, 0.0);
    for t in 0..mesh.num_elements() {
        let div = flux.divergence(mesh, t);
        for sub in space.sub_triangles(t) {
            l2 += rule.integrate(sub.vertices, |p| {
                let d = exact_u(p) - flux.value(mesh, t, p);
                d.dot(d)
            });
            hdiv += rule.integrate(sub.vertices, |p| (source(p) - div).powi(2));
        }
    }
    (l2.sqrt(), hdiv.sqrt())
}

/// Pairwise orders `log₂(e_i / e_{i+1})` for meshes with `N` doubling
/// between rows; the first entry is absent.
pub fn fit_orders(ns: &[usize], errors: &[f64]) -> Result<Vec<Option<f64>>> {
    if ns.len() != errors.len() {
        return Err(Error::DimensionMismatch {
            expected: ns.len(),
            found: errors.len(),
        });
    }
    if ns.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::NonHalvingSequence);
    }
    Ok((0..ns.len())
        .map(|i| (i > 0).then(|| (errors[i - 1] / errors[i]).log2()))
        .collect())
}

/// One refinement level of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    /// Squares per side.
    pub n: usize,
    pub l2: f64,
    pub energy: f64,
    pub flux_l2: f64,
    pub flux_hdiv: f64,
    pub conservation: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time: f64,
}

impl ErrorRow {
    /// `1/h` for the default domain of side 2.
    pub fn inv_h(&self) -> f64 {
        self.n as f64 / 2.0
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorReport {
    pub title: String,
    pub rows: Vec<ErrorRow>,
}

/// Error columns of the report, in table order.
pub const ERROR_COLUMNS: [&str; 4] = ["L2", "energy", "flux_L2", "flux_Hdiv"];

impl ErrorReport {
    fn ns(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.n).collect()
    }

    fn column(&self, k: usize) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match k {
                0 => r.l2,
                1 => r.energy,
                2 => r.flux_l2,
                _ => r.flux_hdiv,
            })
            .collect()
    }

    /// Errors as printed (6 significant digits after the point).
    fn printed(&self, k: usize) -> Vec<String> {
        self.column(k).iter().map(|e| format_error(*e)).collect()
    }

    /// Orders of column `k` computed from the printed errors, so tables are
    /// self-consistent. `None` when the mesh sequence is not halving.
    pub fn orders(&self, k: usize) -> Option<Vec<Option<f64>>> {
        let printed: Vec<f64> = self.printed(k).iter().map(|s| s.parse().expect("printed number")).collect();
        fit_orders(&self.ns(), &printed).ok()
    }

    pub fn is_halving(&self) -> bool {
        fit_orders(&self.ns(), &vec![1.0; self.rows.len()]).is_ok()
    }

    pub fn csv_header() -> &'static str {
        "N,inv_h,L2,L2_order,energy,energy_order,flux_L2,flux_L2_order,flux_Hdiv,flux_Hdiv_order,max_conservation,pcg_iterations,converged,wall_time_s"
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(Self::csv_header());
        out.push('\n');
        let printed: Vec<Vec<String>> = (0..4).map(|k| self.printed(k)).collect();
        let orders: Vec<Option<Vec<Option<f64>>>> = (0..4).map(|k| self.orders(k)).collect();
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{},{}", row.n, row.inv_h());
            for k in 0..4 {
                let order = orders[k].as_ref().and_then(|o| o[i]).map(format_order).unwrap_or_default();
                let _ = write!(out, ",{},{}", printed[k][i], order);
            }
            let _ = writeln!(
                out,
                ",{},{},{},{:.3}",
                format_error(row.conservation),
                row.iterations,
                row.converged,
                row.wall_time
            );
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        if !self.title.is_empty() {
            let _ = writeln!(out, "### {}\n", self.title);
        }
        out.push_str("| N | 1/h | ‖p−p_h‖₀ | order | ⦀p−p_h⦀_h | order | ‖u−u_h‖₀ | order | ‖div(u−u_h)‖₀ | order | max local conservation | PCG its | time (s) |\n");
        out.push_str("|---|---|---|---|---|---|---|---|---|---|---|---|---|\n");
        let printed: Vec<Vec<String>> = (0..4).map(|k| self.printed(k)).collect();
        let orders: Vec<Option<Vec<Option<f64>>>> = (0..4).map(|k| self.orders(k)).collect();
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "| {} | {} |", row.n, row.inv_h());
            for k in 0..4 {
                let order = orders[k].as_ref().and_then(|o| o[i]).map(format_order).unwrap_or_else(|| "–".into());
                let _ = write!(out, " {} | {} |", printed[k][i], order);
            }
            let its = if row.converged {
                row.iterations.to_string()
            } else {
                format!("{} (not converged)", row.iterations)
            };
            let _ = writeln!(out, " {} | {} | {:.3} |", format_error(row.conservation), its, row.wall_time);
        }
        if !self.is_halving() {
            out.push_str("\nOrders omitted: mesh sizes do not double between rows.\n");
        }
        out
    }
}

pub fn format_error(e: f64) -> String {
    format!("{e:.6e}")
}

pub fn format_order(o: f64) -> String {
    format!("{o:.4}")
}
