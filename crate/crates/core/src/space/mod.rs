//! The enriched immersed space: immersed piecewise-linear nodal functions
//! plus one constant per element.

mod basis;
mod cut;
mod interp;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{ElementKind, LevelSet, Point, Side};
use crate::mesh::{MeshClassification, StructuredMesh};
use crate::problems::Coefficient;

pub use basis::{barycentric_functions, basis_residuals, build_local_basis, BasisResiduals, IfemLocalBasis, LinearFn, MAX_BASIS_CONDITION};
pub use cut::{build_cut_element, CutElement, SubTriangle, SLIVER_FRACTION};
pub use interp::{interpolate_ih, interpolate_pih, nodal_field};

/// Shape functions of one element.
#[derive(Clone, Debug)]
pub enum ElementBasis {
    Standard { funcs: [LinearFn; 3], side: Side },
    Immersed(Box<IfemLocalBasis>),
}

/// `E_h`: nodal DOFs on interior vertices first (in vertex order), then one
/// constant DOF per element.
#[derive(Debug)]
pub struct EnrichedSpace<'m> {
    mesh: &'m StructuredMesh,
    level_set: Arc<dyn LevelSet>,
    beta: Coefficient,
    classification: MeshClassification,
    bases: Vec<ElementBasis>,
    vertex_dof: Vec<Option<usize>>,
    n_nodal: usize,
}

impl<'m> EnrichedSpace<'m> {
    pub fn new(mesh: &'m StructuredMesh, level_set: Arc<dyn LevelSet>, beta: Coefficient) -> Result<Self> {
        let classification = mesh.classify(level_set.as_ref())?;
        let mut bases = Vec::with_capacity(mesh.num_elements());
        for (t, kind) in classification.kinds.iter().enumerate() {
            let tri = mesh.triangle(t);
            bases.push(match *kind {
                ElementKind::NonInterface(side) => ElementBasis::Standard {
                    funcs: barycentric_functions(&tri),
                    side: if side == Side::OnInterface { Side::Plus } else { side },
                },
                ElementKind::Interface(seg) => {
                    let cut = build_cut_element(t, tri, seg, level_set.as_ref())?;
                    ElementBasis::Immersed(Box::new(build_local_basis(&tri, &cut, beta)?))
                }
            });
        }
        let mut vertex_dof = vec![None; mesh.num_vertices()];
        let mut n_nodal = 0;
        for (v, dof) in vertex_dof.iter_mut().enumerate() {
            if !mesh.is_boundary_vertex(v) {
                *dof = Some(n_nodal);
                n_nodal += 1;
            }
        }
        Ok(Self {
            mesh,
            level_set,
            beta,
            classification,
            bases,
            vertex_dof,
            n_nodal,
        })
    }

    pub fn mesh(&self) -> &'m StructuredMesh {
        self.mesh
    }

    pub fn level_set(&self) -> &dyn LevelSet {
        self.level_set.as_ref()
    }

    pub fn beta(&self) -> Coefficient {
        self.beta
    }

    pub fn classification(&self) -> &MeshClassification {
        &self.classification
    }

    pub fn basis(&self, t: usize) -> &ElementBasis {
        &self.bases[t]
    }

    /// Immersed basis of an interface element.
    pub fn immersed(&self, t: usize) -> Option<&IfemLocalBasis> {
        match &self.bases[t] {
            ElementBasis::Immersed(b) => Some(b),
            ElementBasis::Standard { .. } => None,
        }
    }

    pub fn cut(&self, t: usize) -> Option<&CutElement> {
        self.immersed(t).map(|b| &b.cut)
    }

    pub fn is_interface(&self, t: usize) -> bool {
        self.immersed(t).is_some()
    }

    pub fn interface_elements(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.bases.len()).filter(|&t| self.is_interface(t))
    }

    /// `N₀`, the number of interior vertices.
    pub fn n_nodal(&self) -> usize {
        self.n_nodal
    }

    /// `N_e`, the number of elements.
    pub fn n_elements(&self) -> usize {
        self.bases.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_nodal + self.bases.len()
    }

    pub fn vertex_dof(&self, v: usize) -> Option<usize> {
        self.vertex_dof[v]
    }

    pub fn constant_dof(&self, t: usize) -> usize {
        self.n_nodal + t
    }

    /// Subdomain of `p` as seen by the discrete functions of element `t`
    /// (the chord decides on interface elements).
    pub fn side_at(&self, t: usize, p: Point) -> Side {
        match &self.bases[t] {
            ElementBasis::Standard { side, .. } => *side,
            ElementBasis::Immersed(b) => b.cut.side_of(p, &self.mesh.triangle(t)),
        }
    }

    pub fn beta_at(&self, t: usize, p: Point) -> f64 {
        self.beta.on(self.side_at(t, p))
    }

    /// Largest coefficient present in element `t`.
    pub fn beta_max_in(&self, t: usize) -> f64 {
        match &self.bases[t] {
            ElementBasis::Standard { side, .. } => self.beta.on(*side),
            ElementBasis::Immersed(_) => self.beta.max(),
        }
    }

    /// Values and gradients of the three vertex functions of `t` at `p`,
    /// on the given side (only relevant for interface elements).
    pub fn shape_on(&self, t: usize, p: Point, side: Side) -> [(f64, Point); 3] {
        match &self.bases[t] {
            ElementBasis::Standard { funcs, .. } => funcs.map(|f| (f.eval(p), f.grad())),
            ElementBasis::Immersed(b) => std::array::from_fn(|j| {
                let f = b.piece(j, side);
                (f.eval(p), f.grad())
            }),
        }
    }

    /// Values and gradients of the vertex functions of `t` at `p`.
    pub fn shape(&self, t: usize, p: Point) -> [(f64, Point); 3] {
        self.shape_on(t, p, self.side_at(t, p))
    }

    fn check_inside(&self, t: usize, p: Point) -> Result<()> {
        if t < self.bases.len() && self.mesh.contains(t, p) {
            Ok(())
        } else {
            Err(Error::PointOutsideElement { element: t })
        }
    }

    /// Value of local vertex function `j` of element `t` at `p`.
    pub fn eval_local(&self, t: usize, j: usize, p: Point) -> Result<f64> {
        self.check_inside(t, p)?;
        Ok(self.shape(t, p)[j].0)
    }

    pub fn grad_local(&self, t: usize, j: usize, p: Point) -> Result<Point> {
        self.check_inside(t, p)?;
        Ok(self.shape(t, p)[j].1)
    }

    /// Sub-triangles carrying a single side; the element itself when uncut.
    pub fn sub_triangles(&self, t: usize) -> impl Iterator<Item = SubTriangle> + '_ {
        let (whole, parts) = match &self.bases[t] {
            ElementBasis::Standard { side, .. } => (
                Some(SubTriangle {
                    vertices: self.mesh.triangle(t),
                    side: *side,
                }),
                None,
            ),
            ElementBasis::Immersed(b) => (None, Some(b.cut.sub_triangles.iter().copied())),
        };
        whole.into_iter().chain(parts.into_iter().flatten())
    }

    /// Field from a coefficient vector, with boundary vertex values from `g`.
    pub fn field_from_dofs(&self, dofs: &[f64], g: &dyn Fn(Point) -> f64) -> DiscreteField {
        let vertex_values = self
            .mesh
            .vertices()
            .iter()
            .enumerate()
            .map(|(v, &p)| self.vertex_dof[v].map_or_else(|| g(p), |d| dofs[d]))
            .collect();
        DiscreteField {
            vertex_values,
            constants: dofs[self.n_nodal..].to_vec(),
        }
    }
}

/// A function of `E_h` (plus a boundary lifting): values at every mesh
/// vertex and one constant per element.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteField {
    pub vertex_values: Vec<f64>,
    pub constants: Vec<f64>,
}

impl DiscreteField {
    pub fn zeros(space: &EnrichedSpace<'_>) -> Self {
        Self {
            vertex_values: vec![0.0; space.mesh().num_vertices()],
            constants: vec![0.0; space.n_elements()],
        }
    }

    /// Value inside element `t` at `p` on the given side.
    pub fn value_on(&self, space: &EnrichedSpace<'_>, t: usize, p: Point, side: Side) -> f64 {
        let tri = space.mesh().triangles()[t];
        let shape = space.shape_on(t, p, side);
        (0..3).map(|j| self.vertex_values[tri[j]] * shape[j].0).sum::<f64>() + self.constants[t]
    }

    pub fn gradient_on(&self, space: &EnrichedSpace<'_>, t: usize, p: Point, side: Side) -> Point {
        let tri = space.mesh().triangles()[t];
        let shape = space.shape_on(t, p, side);
        (0..3).fold(Point::default(), |acc, j| acc + shape[j].1 * self.vertex_values[tri[j]])
    }

    pub fn value(&self, space: &EnrichedSpace<'_>, t: usize, p: Point) -> f64 {
        self.value_on(space, t, p, space.side_at(t, p))
    }

    pub fn gradient(&self, space: &EnrichedSpace<'_>, t: usize, p: Point) -> Point {
        self.gradient_on(space, t, p, space.side_at(t, p))
    }

    /// Checked evaluation.
    pub fn eval(&self, space: &EnrichedSpace<'_>, t: usize, p: Point) -> Result<f64> {
        space.check_inside(t, p)?;
        Ok(self.value(space, t, p))
    }

    /// Coefficient vector (interior vertex values, then constants).
    pub fn dofs(&self, space: &EnrichedSpace<'_>) -> Vec<f64> {
        let mut out = vec![0.0; space.n_dofs()];
        for (v, &value) in self.vertex_values.iter().enumerate() {
            if let Some(d) = space.vertex_dof(v) {
                out[d] = value;
            }
        }
        out[space.n_nodal()..].copy_from_slice(&self.constants);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Circle, ConstantLevelSet};
    use crate::mesh::Rect;

    fn circle_space(mesh: &StructuredMesh, beta: (f64, f64)) -> EnrichedSpace<'_> {
        let beta = Coefficient::new(beta.0, beta.1).unwrap();
        EnrichedSpace::new(mesh, Arc::new(Circle::centered(0.4)), beta).unwrap()
    }

    #[test]
    fn dof_counts() {
        let mesh = StructuredMesh::new(16, Rect::default()).unwrap();
        let space = circle_space(&mesh, (10.0, 1.0));
        assert_eq!(space.n_nodal(), 15 * 15);
        assert_eq!(space.n_elements(), 512);
        assert_eq!(space.n_dofs(), 225 + 512);
        for v in 0..mesh.num_vertices() {
            assert_eq!(space.vertex_dof(v).is_none(), mesh.is_boundary_vertex(v));
        }
    }

    #[test]
    fn standard_vertex_function_is_nodal() {
        let mesh = StructuredMesh::new(4, Rect::default()).unwrap();
        let space = EnrichedSpace::new(&mesh, Arc::new(ConstantLevelSet(1.0)), Coefficient::new(1.0, 1.0).unwrap()).unwrap();
        let tri = mesh.triangle(5);
        for j in 0..3 {
            assert!((space.eval_local(5, j, tri[j]).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!(matches!(
            space.eval_local(5, 0, Point::new(5.0, 5.0)),
            Err(Error::PointOutsideElement { element: 5 })
        ));
    }

    #[test]
    fn immersed_functions_continuous_at_cut_points() {
        let mesh = StructuredMesh::new(16, Rect::default()).unwrap();
        let space = circle_space(&mesh, (1000.0, 1.0));
        assert!(space.interface_elements().count() > 0);
        for t in space.interface_elements() {
            let b = space.immersed(t).unwrap();
            let tri = mesh.triangle(t);
            for e in [b.cut.segment.e1, b.cut.segment.e2] {
                let minus = space.shape_on(t, e, Side::Minus);
                let plus = space.shape_on(t, e, Side::Plus);
                for j in 0..3 {
                    assert!((minus[j].0 - plus[j].0).abs() < 1e-10);
                }
            }
            let c = crate::geometry::centroid(&tri);
            let g = space.shape(t, c).iter().fold(Point::default(), |acc, s| acc + s.1);
            assert!(g.norm() < 1e-9, "gradient of partition of unity {g:?}");
        }
    }

    #[test]
    fn field_dofs_round_trip() {
        let mesh = StructuredMesh::new(8, Rect::default()).unwrap();
        let space = circle_space(&mesh, (1.0, 1.0));
        let dofs: Vec<f64> = (0..space.n_dofs()).map(|i| (i as f64 * 0.37).sin()).collect();
        let field = space.field_from_dofs(&dofs, &|p| p.x);
        assert_eq!(field.dofs(&space), dofs);
        for (v, &p) in mesh.vertices().iter().enumerate() {
            if mesh.is_boundary_vertex(v) {
                assert_eq!(field.vertex_values[v], p.x);
            }
        }
    }
}
