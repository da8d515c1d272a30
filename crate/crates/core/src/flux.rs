//! Locally conservative Raviart–Thomas flux recovered from the discrete
//! solution.

use crate::assembly::{edge_quadrature, sigma_edge, AssemblyParams};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::StructuredMesh;
use crate::problems::ProblemSpec;
use crate::space::{DiscreteField, EnrichedSpace};

/// One normal-flux coefficient `u_h · n_e` per mesh edge.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveredFlux {
    pub coefficients: Vec<f64>,
}

impl RecoveredFlux {
    /// RT0 field of element `t` at `p`, without a containment check.
    pub fn value(&self, mesh: &StructuredMesh, t: usize, p: Point) -> Point {
        let tri = mesh.triangle(t);
        let two_area = 2.0 * mesh.area(t);
        let edges = mesh.element_edges(t);
        let mut u = Point::default();
        for (k, &e) in edges.iter().enumerate() {
            let edge = &mesh.edges()[e];
            let weight = self.coefficients[e] * edge.orientation(t) * edge.length / two_area;
            u = u + (p - tri[(k + 2) % 3]) * weight;
        }
        u
    }

    /// Checked RT0 evaluation.
    pub fn eval(&self, mesh: &StructuredMesh, t: usize, p: Point) -> Result<Point> {
        if t >= mesh.num_elements() || !mesh.contains(t, p) {
            return Err(Error::PointOutsideElement { element: t });
        }
        Ok(self.value(mesh, t, p))
    }

    /// Outward flux through the boundary of element `t`.
    pub fn outflow(&self, mesh: &StructuredMesh, t: usize) -> f64 {
        mesh.element_edges(t)
            .iter()
            .map(|&e| {
                let edge = &mesh.edges()[e];
                self.coefficients[e] * edge.orientation(t) * edge.length
            })
            .sum()
    }

    /// Constant divergence on element `t`.
    pub fn divergence(&self, mesh: &StructuredMesh, t: usize) -> f64 {
        self.outflow(mesh, t) / mesh.area(t)
    }

    /// Interpolates a vector field by its edge-mean normal components.
    pub fn interpolate(mesh: &StructuredMesh, u: &dyn Fn(Point) -> Point) -> Self {
        let coefficients = (0..mesh.num_edges())
            .map(|e| {
                let (a, b) = mesh.edge_points(e);
                let n = mesh.edges()[e].normal;
                crate::quadrature::segment_points(a, b, 3)
                    .iter()
                    .map(|&(p, w)| w * u(p).dot(n))
                    .sum::<f64>()
                    / a.dist(b)
            })
            .collect();
        Self { coefficients }
    }
}

/// Recovers the flux for a manufactured problem (Dirichlet data from it).
pub fn recover_flux(space: &EnrichedSpace<'_>, problem: &ProblemSpec, field: &DiscreteField, params: &AssemblyParams) -> RecoveredFlux {
    recover_flux_with(space, field, problem.dirichlet.as_ref(), params)
}

/// `u_e = (1/|e|) ∫_e (-{β∇p_h·n_e} + (σ/|e|)⟦p_h⟧)`, with `⟦p_h⟧ = p_h - g`
/// on boundary edges. Uses the assembly's penalty and edge quadrature.
pub fn recover_flux_with(space: &EnrichedSpace<'_>, field: &DiscreteField, dirichlet: &dyn Fn(Point) -> f64, params: &AssemblyParams) -> RecoveredFlux {
    let mesh = space.mesh();
    let beta = space.beta();
    let coefficients = mesh
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let sigma = sigma_edge(space, e, params.kappa);
            let len = edge.length;
            let mut total = 0.0;
            for (p, w) in edge_quadrature(space, e, params.edge_points) {
                let owner_side = space.side_at(edge.owner, p);
                let mut flux = beta.on(owner_side) * field.gradient_on(space, edge.owner, p, owner_side).dot(edge.normal);
                let mut jump = field.value_on(space, edge.owner, p, owner_side);
                match edge.neighbor {
                    Some(t) => {
                        let side = space.side_at(t, p);
                        flux = 0.5 * (flux + beta.on(side) * field.gradient_on(space, t, p, side).dot(edge.normal));
                        jump -= field.value_on(space, t, p, side);
                    }
                    None => jump -= dirichlet(p),
                }
                total += w * (-flux + sigma / len * jump);
            }
            total / len
        })
        .collect();
    RecoveredFlux { coefficients }
}

/// Per-element balance `|∮_∂T u_h·n - ∫_T f|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationReport {
    pub residuals: Vec<f64>,
    pub max: f64,
    /// `|∮_∂Ω u_h·n - ∫_Ω f|`.
    pub global: f64,
}

pub fn conservation_report(mesh: &StructuredMesh, flux: &RecoveredFlux, element_source: &[f64]) -> ConservationReport {
    let residuals: Vec<f64> = (0..mesh.num_elements())
        .map(|t| (flux.outflow(mesh, t) - element_source[t]).abs())
        .collect();
    let max = residuals.iter().copied().fold(0.0, f64::max);
    let boundary: f64 = mesh
        .edges()
        .iter()
        .zip(&flux.coefficients)
        .filter(|(edge, _)| edge.is_boundary())
        .map(|(edge, &u)| u * edge.length)
        .sum();
    let global = (boundary - element_source.iter().sum::<f64>()).abs();
    ConservationReport { residuals, max, global }
}
