//! Interior-penalty assembly of the enriched immersed system.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::linalg::{CooBuilder, SparseMatrix};
use crate::problems::ProblemSpec;
use crate::quadrature::{edge_points, TriangleRule};
use crate::space::{DiscreteField, EnrichedSpace};

/// Sign of the adjoint consistency term. `NegOne` gives a symmetric matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Theta {
    #[default]
    NegOne,
    Zero,
    One,
}

impl Theta {
    pub fn value(self) -> f64 {
        match self {
            Theta::NegOne => -1.0,
            Theta::Zero => 0.0,
            Theta::One => 1.0,
        }
    }

    pub fn from_value(v: f64) -> Result<Self> {
        match v {
            x if x == -1.0 => Ok(Theta::NegOne),
            x if x == 0.0 => Ok(Theta::Zero),
            x if x == 1.0 => Ok(Theta::One),
            _ => Err(Error::InvalidParameter(format!("theta must be -1, 0 or 1, got {v}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssemblyParams {
    pub theta: Theta,
    /// Penalty scale; `σ = κ · max β` over the elements next to an edge.
    pub kappa: f64,
    /// Exactness degree of the source quadrature on each (sub-)triangle.
    /// Stiffness integrands are piecewise constant and exact for any rule.
    pub volume_degree: usize,
    /// Gauss points per edge segment.
    pub edge_points: usize,
}

impl Default for AssemblyParams {
    fn default() -> Self {
        Self {
            theta: Theta::NegOne,
            kappa: 10.0,
            volume_degree: 4,
            edge_points: 2,
        }
    }
}

impl AssemblyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {}", self.kappa)));
        }
        if self.edge_points == 0 {
            return Err(Error::InvalidParameter("edge_points must be at least 1".into()));
        }
        Ok(())
    }
}

/// Penalty weight of edge `e`.
pub fn sigma_edge(space: &EnrichedSpace<'_>, e: usize, kappa: f64) -> f64 {
    let edge = &space.mesh().edges()[e];
    let owner = space.beta_max_in(edge.owner);
    let neighbor = edge.neighbor.map_or(0.0, |t| space.beta_max_in(t));
    kappa * owner.max(neighbor)
}

/// Quadrature points of edge `e`, split where the interface crosses it.
pub(crate) fn edge_quadrature(space: &EnrichedSpace<'_>, e: usize, n: usize) -> Vec<(Point, f64)> {
    let (a, b) = space.mesh().edge_points(e);
    edge_points(a, b, space.classification().edge_cuts[e], n)
        .into_iter()
        .map(|(p, w, _)| (p, w))
        .collect()
}

/// Assembled system with its DOF partition: nodal DOFs `0..n_nodal`, then
/// element constants.
#[derive(Clone, Debug)]
pub struct BlockSparseSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub n_nodal: usize,
    pub n_elements: usize,
    /// Dirichlet data at every vertex (zero at interior vertices).
    pub boundary_values: Vec<f64>,
    /// `∫_T f` per element with the assembly quadrature.
    pub element_source: Vec<f64>,
    pub params: AssemblyParams,
}

impl BlockSparseSystem {
    pub fn n_dofs(&self) -> usize {
        self.n_nodal + self.n_elements
    }

    pub fn nodal_indices(&self) -> Vec<usize> {
        (0..self.n_nodal).collect()
    }

    pub fn constant_indices(&self) -> Vec<usize> {
        (self.n_nodal..self.n_dofs()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.params.theta == Theta::NegOne
    }

    /// `[A₁₁, A₁₂, A₂₁, A₂₂]`.
    pub fn blocks(&self) -> Result<[SparseMatrix; 4]> {
        let w1 = self.nodal_indices();
        let w2 = self.constant_indices();
        Ok([
            self.matrix.extract_block(&w1, &w1)?,
            self.matrix.extract_block(&w1, &w2)?,
            self.matrix.extract_block(&w2, &w1)?,
            self.matrix.extract_block(&w2, &w2)?,
        ])
    }

    /// Discrete solution with the Dirichlet lifting restored.
    pub fn field_from_dofs(&self, space: &EnrichedSpace<'_>, x: &[f64]) -> DiscreteField {
        let mut vertex_values = self.boundary_values.clone();
        for (v, value) in vertex_values.iter_mut().enumerate() {
            if let Some(d) = space.vertex_dof(v) {
                *value = x[d];
            }
        }
        DiscreteField {
            vertex_values,
            constants: x[self.n_nodal..].to_vec(),
        }
    }
}

/// Largest violation of the M-matrix sign and weak diagonal dominance
/// conditions, relative to the largest diagonal entry. Zero for an M-matrix.
pub fn m_matrix_violation(a: &SparseMatrix) -> f64 {
    let scale = a.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs())).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        let mut row_sum = 0.0;
        let mut diag = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            row_sum += v;
            if j == i {
                diag = v;
            } else {
                worst = worst.max(v);
            }
        }
        worst = worst.max(-diag).max(-row_sum);
    }
    worst / scale
}

/// Assembles `a_h` and `(f, ·)` for a manufactured problem.
pub fn assemble(space: &EnrichedSpace<'_>, problem: &ProblemSpec, params: &AssemblyParams) -> Result<BlockSparseSystem> {
    assemble_with(space, problem.source.as_ref(), problem.dirichlet.as_ref(), params)
}

#[derive(Clone, Copy, PartialEq)]
pub(crate) enum Key {
    Vertex(usize),
    Constant(usize),
}

/// Local contributions scattered into the global system.
struct Scatter<'a> {
    space: &'a EnrichedSpace<'a>,
    boundary_values: &'a [f64],
    coo: CooBuilder,
    rhs: Vec<f64>,
}

impl Scatter<'_> {
    fn dof(&self, k: Key) -> Option<usize> {
        match k {
            Key::Vertex(v) => self.space.vertex_dof(v),
            Key::Constant(t) => Some(self.space.constant_dof(t)),
        }
    }

    fn fixed_value(&self, k: Key) -> f64 {
        match k {
            Key::Vertex(v) => self.boundary_values[v],
            Key::Constant(_) => 0.0,
        }
    }

    fn add(&mut self, keys: &[Key], mat: &[[f64; MAX_KEYS]; MAX_KEYS], load: &[f64; MAX_KEYS], location: impl Fn() -> String) -> Result<()> {
        let n = keys.len();
        if mat[..n].iter().any(|r| r[..n].iter().any(|v| !v.is_finite())) || load[..n].iter().any(|v| !v.is_finite()) {
            return Err(Error::AssemblyFailure { location: location() });
        }
        for i in 0..n {
            let Some(di) = self.dof(keys[i]) else { continue };
            self.rhs[di] += load[i];
            for j in 0..n {
                match self.dof(keys[j]) {
                    Some(dj) => self.coo.push(di, dj, mat[i][j]),
                    None => self.rhs[di] -= mat[i][j] * self.fixed_value(keys[j]),
                }
            }
        }
        Ok(())
    }
}

const MAX_KEYS: usize = 8;

/// Assembles with explicit source and Dirichlet data.
pub fn assemble_with(
    space: &EnrichedSpace<'_>,
    source: &dyn Fn(Point) -> f64,
    dirichlet: &dyn Fn(Point) -> f64,
    params: &AssemblyParams,
) -> Result<BlockSparseSystem> {
    params.validate()?;
    let mesh = space.mesh();
    let n = space.n_dofs();
    let boundary_values: Vec<f64> = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, &p)| if mesh.is_boundary_vertex(v) { dirichlet(p) } else { 0.0 })
        .collect();
    let mut sc = Scatter {
        space,
        boundary_values: &boundary_values,
        coo: CooBuilder::new(n, n),
        rhs: vec![0.0; n],
    };

    let element_source = volume_terms(space, source, params, &mut sc)?;
    edge_terms(space, dirichlet, params, &mut sc)?;

    Ok(BlockSparseSystem {
        matrix: sc.coo.build(),
        rhs: sc.rhs,
        n_nodal: space.n_nodal(),
        n_elements: space.n_elements(),
        boundary_values,
        element_source,
        params: *params,
    })
}

/// `(f, w)` for every basis function, without edge or boundary terms.
pub fn assemble_rhs_only(space: &EnrichedSpace<'_>, source: &dyn Fn(Point) -> f64, params: &AssemblyParams) -> Vec<f64> {
    let mut rhs = vec![0.0; space.n_dofs()];
    let rule = TriangleRule::for_degree(params.volume_degree);
    let tris = space.mesh().triangles();
    for t in 0..space.n_elements() {
        let (load, integral) = element_load(space, t, source, &rule);
        for (j, &v) in tris[t].iter().enumerate() {
            if let Some(d) = space.vertex_dof(v) {
                rhs[d] += load[j];
            }
        }
        rhs[space.constant_dof(t)] += integral;
    }
    rhs
}

fn element_load(space: &EnrichedSpace<'_>, t: usize, source: &dyn Fn(Point) -> f64, rule: &TriangleRule) -> ([f64; 3], f64) {
    let mut load = [0.0; 3];
    let mut integral = 0.0;
    for sub in space.sub_triangles(t) {
        for (p, w) in rule.mapped(sub.vertices) {
            let f = source(p);
            let shape = space.shape_on(t, p, sub.side);
            for j in 0..3 {
                load[j] += w * f * shape[j].0;
            }
            integral += w * f;
        }
    }
    (load, integral)
}

fn volume_terms(space: &EnrichedSpace<'_>, source: &dyn Fn(Point) -> f64, params: &AssemblyParams, sc: &mut Scatter<'_>) -> Result<Vec<f64>> {
    let rule = TriangleRule::for_degree(params.volume_degree);
    let beta = space.beta();
    let tris = space.mesh().triangles();
    let mut element_source = Vec::with_capacity(space.n_elements());
    for t in 0..space.n_elements() {
        let mut mat = [[0.0; MAX_KEYS]; MAX_KEYS];
        for sub in space.sub_triangles(t) {
            // gradients are constant on each sub-triangle
            let c = crate::geometry::centroid(&sub.vertices);
            let shape = space.shape_on(t, c, sub.side);
            let scale = beta.on(sub.side) * sub.area();
            for i in 0..3 {
                for j in 0..3 {
                    mat[i][j] += scale * shape[i].1.dot(shape[j].1);
                }
            }
        }
        let (load3, integral) = element_load(space, t, source, &rule);
        let mut load = [0.0; MAX_KEYS];
        load[..3].copy_from_slice(&load3);
        load[3] = integral;
        element_source.push(integral);
        let tri = tris[t];
        let keys = [Key::Vertex(tri[0]), Key::Vertex(tri[1]), Key::Vertex(tri[2]), Key::Constant(t)];
        sc.add(&keys, &mat, &load, || format!("element {t}"))?;
    }
    Ok(element_source)
}

/// Local functions touching an edge: up to three vertex functions and the
/// constant of each adjacent element, merged by global key.
pub(crate) struct EdgeLocal {
    pub keys: Vec<Key>,
    /// `(element, sign, [key index of vertex functions 0..3], key index of constant)`
    pub sides: Vec<(usize, f64, [usize; 3], usize)>,
}

impl EdgeLocal {
    fn new(space: &EnrichedSpace<'_>, e: usize) -> Self {
        let edge = &space.mesh().edges()[e];
        let tris = space.mesh().triangles();
        let mut keys: Vec<Key> = Vec::with_capacity(MAX_KEYS);
        let index = |k: Key, keys: &mut Vec<Key>| match keys.iter().position(|x| *x == k) {
            Some(i) => i,
            None => {
                keys.push(k);
                keys.len() - 1
            }
        };
        let mut sides = Vec::with_capacity(2);
        for (t, sign) in std::iter::once((edge.owner, 1.0)).chain(edge.neighbor.map(|t| (t, -1.0))) {
            let vs = tris[t].map(|v| index(Key::Vertex(v), &mut keys));
            let c = index(Key::Constant(t), &mut keys);
            sides.push((t, sign, vs, c));
        }
        Self { keys, sides }
    }
}

fn edge_terms(space: &EnrichedSpace<'_>, dirichlet: &dyn Fn(Point) -> f64, params: &AssemblyParams, sc: &mut Scatter<'_>) -> Result<()> {
    let theta = params.theta.value();
    let beta = space.beta();
    for (e, edge) in space.mesh().edges().iter().enumerate() {
        let local = EdgeLocal::new(space, e);
        let nk = local.keys.len();
        let sigma = sigma_edge(space, e, params.kappa);
        let len = edge.length;
        let boundary = edge.is_boundary();
        let avg = if boundary { 1.0 } else { 0.5 };

        let mut mat = [[0.0; MAX_KEYS]; MAX_KEYS];
        let mut load = [0.0; MAX_KEYS];
        let mut flux_sum = [0.0; MAX_KEYS];
        let mut mean = [0.0; MAX_KEYS];
        let mut g_mean = 0.0;
        for (p, w) in edge_quadrature(space, e, params.edge_points) {
            let mut jump = [0.0; MAX_KEYS];
            let mut flux = [0.0; MAX_KEYS];
            for &(t, sign, vs, c) in &local.sides {
                let side = space.side_at(t, p);
                let b = beta.on(side);
                let shape = space.shape_on(t, p, side);
                for j in 0..3 {
                    jump[vs[j]] += sign * shape[j].0;
                    flux[vs[j]] += avg * b * shape[j].1.dot(edge.normal);
                }
                jump[c] += sign;
            }
            if boundary {
                for i in 0..nk {
                    for j in 0..nk {
                        mat[i][j] -= w * flux[j] * jump[i];
                    }
                    flux_sum[i] += w * flux[i];
                    mean[i] += w * jump[i] / len;
                }
                g_mean += w * dirichlet(p) / len;
            } else {
                for i in 0..nk {
                    for j in 0..nk {
                        mat[i][j] += w * (-flux[j] * jump[i] + theta * flux[i] * jump[j] + sigma / len * jump[j] * jump[i]);
                    }
                }
            }
        }
        if boundary {
            for i in 0..nk {
                for j in 0..nk {
                    mat[i][j] += theta * flux_sum[i] * mean[j] + sigma * mean[j] * mean[i];
                }
                load[i] = theta * flux_sum[i] * g_mean + sigma * g_mean * mean[i];
            }
        }
        sc.add(&local.keys, &mat, &load, || format!("edge {e}"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Circle, ConstantLevelSet};
    use crate::mesh::{Rect, StructuredMesh};
    use crate::problems::{circle_benchmark, Coefficient};
    use std::sync::Arc;

    fn uniform_space(mesh: &StructuredMesh) -> EnrichedSpace<'_> {
        EnrichedSpace::new(mesh, Arc::new(ConstantLevelSet(1.0)), Coefficient::new(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn theta_values() {
        assert_eq!(Theta::from_value(-1.0).unwrap(), Theta::NegOne);
        assert_eq!(Theta::from_value(1.0).unwrap().value(), 1.0);
        assert!(Theta::from_value(0.5).is_err());
    }

    #[test]
    fn kappa_must_be_positive() {
        let p = AssemblyParams {
            kappa: 0.0,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn sigma_rule() {
        let mesh = StructuredMesh::new(8, Rect::default()).unwrap();
        let space = uniform_space(&mesh);
        for e in 0..mesh.num_edges() {
            assert_eq!(sigma_edge(&space, e, 10.0), 10.0);
        }
        let space = EnrichedSpace::new(&mesh, Arc::new(Circle::centered(0.4)), Coefficient::new(100.0, 1.0).unwrap()).unwrap();
        let t = space.interface_elements().next().unwrap();
        let e = mesh.element_edges(t)[0];
        assert_eq!(sigma_edge(&space, e, 10.0), 1000.0);
    }

    #[test]
    fn symmetric_for_theta_minus_one() {
        let mesh = StructuredMesh::new(8, Rect::default()).unwrap();
        let problem = circle_benchmark(1000.0, 1.0).unwrap();
        let space = EnrichedSpace::new(&mesh, problem.level_set.clone(), problem.beta).unwrap();
        let sys = assemble(&space, &problem, &AssemblyParams::default()).unwrap();
        assert!(sys.matrix.asymmetry() <= 1e-12 * sys.matrix.max_abs());
        let [_, a12, a21, a22] = sys.blocks().unwrap();
        assert_eq!(a12.nrows(), space.n_nodal());
        assert_eq!(a21.nrows(), space.n_elements());
        assert!(m_matrix_violation(&a22) <= 1e-14);
    }

    #[test]
    fn rhs_only_constants_are_areas() {
        let mesh = StructuredMesh::new(4, Rect::default()).unwrap();
        let space = uniform_space(&mesh);
        let rhs = assemble_rhs_only(&space, &|_| 1.0, &AssemblyParams::default());
        for t in 0..mesh.num_elements() {
            assert!((rhs[space.constant_dof(t)] - mesh.area(t)).abs() < 1e-15);
        }
        let zero = assemble_rhs_only(&space, &|_| 0.0, &AssemblyParams::default());
        assert!(zero.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rhs_matches_reference_quadrature() {
        let mesh = StructuredMesh::new(16, Rect::default()).unwrap();
        let space = uniform_space(&mesh);
        let f = |p: Point| -9.0 * p.norm();
        let rhs = assemble_rhs_only(&space, &f, &AssemblyParams::default());
        let t = mesh.locate(Point::new(0.61, 0.33)).unwrap();
        let [a, b, c] = mesh.triangle(t);
        // Strang-Fix 6-point rule written out independently
        let area = crate::geometry::triangle_area(a, b, c).abs();
        let mut reference = 0.0;
        for (w, l1, l2) in [(0.223381589678011, 0.108103018168070, 0.445948490915965), (0.109951743655322, 0.816847572980459, 0.091576213509771)] {
            for l in [[l1, l2, l2], [l2, l1, l2], [l2, l2, l1]] {
                let p = a * l[0] + b * l[1] + c * l[2];
                reference += w * area * f(p);
            }
        }
        let got = rhs[space.constant_dof(t)];
        assert!((got - reference).abs() <= 1e-8 * reference.abs(), "{got} {reference}");
        let exact = TriangleRule::collapsed(12).integrate(mesh.triangle(t), f);
        assert!((got - exact).abs() <= 1e-6 * exact.abs());
    }

    #[test]
    fn theta_plus_one_is_not_symmetric() {
        let mesh = StructuredMesh::new(4, Rect::default()).unwrap();
        let space = uniform_space(&mesh);
        let params = AssemblyParams {
            theta: Theta::One,
            ..Default::default()
        };
        let sys = assemble_with(&space, &|_| 1.0, &|_| 0.0, &params).unwrap();
        assert!(sys.matrix.asymmetry() > 1e-6);
        assert!(!sys.is_symmetric());
    }
}
