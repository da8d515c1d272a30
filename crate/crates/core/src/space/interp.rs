use crate::geometry::Point;
use crate::quadrature::TriangleRule;

use super::{DiscreteField, EnrichedSpace};

/// Nodal interpolation onto the interior-vertex DOFs.
pub fn interpolate_ih(space: &EnrichedSpace<'_>, v: &dyn Fn(Point) -> f64) -> Vec<f64> {
    let mesh = space.mesh();
    let mut out = vec![0.0; space.n_nodal()];
    for (i, &p) in mesh.vertices().iter().enumerate() {
        if let Some(d) = space.vertex_dof(i) {
            out[d] = v(p);
        }
    }
    out
}

/// Nodal interpolant at every vertex (boundary included), no constants.
pub fn nodal_field(space: &EnrichedSpace<'_>, v: &dyn Fn(Point) -> f64) -> DiscreteField {
    DiscreteField {
        vertex_values: space.mesh().vertices().iter().map(|&p| v(p)).collect(),
        constants: vec![0.0; space.n_elements()],
    }
}

/// `Π_h v = I_h v + Q_h⁰(v - I_h v)`, with boundary vertices carrying `v`.
pub fn interpolate_pih(space: &EnrichedSpace<'_>, v: &dyn Fn(Point) -> f64) -> DiscreteField {
    let mut field = nodal_field(space, v);
    let rule = TriangleRule::degree4();
    for t in 0..space.n_elements() {
        let mut integral = 0.0;
        for sub in space.sub_triangles(t) {
            integral += rule.integrate(sub.vertices, |p| v(p) - field.value_on(space, t, p, sub.side));
        }
        field.constants[t] = integral / space.mesh().area(t);
    }
    field
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Circle, ConstantLevelSet};
    use crate::mesh::{Rect, StructuredMesh};
    use crate::problems::Coefficient;
    use std::sync::Arc;

    #[test]
    fn zero_interpolates_to_zero() {
        let mesh = StructuredMesh::new(8, Rect::default()).unwrap();
        let space = EnrichedSpace::new(&mesh, Arc::new(Circle::centered(0.4)), Coefficient::new(10.0, 1.0).unwrap()).unwrap();
        assert!(interpolate_ih(&space, &|_| 0.0).iter().all(|&x| x == 0.0));
        let f = interpolate_pih(&space, &|_| 0.0);
        assert!(f.constants.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn linear_function_has_no_constant_part() {
        let mesh = StructuredMesh::new(8, Rect::default()).unwrap();
        let space = EnrichedSpace::new(&mesh, Arc::new(ConstantLevelSet(1.0)), Coefficient::new(1.0, 1.0).unwrap()).unwrap();
        let f = interpolate_pih(&space, &|p| 0.3 * p.x - 2.0 * p.y + 0.1);
        assert!(f.constants.iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn interior_values_match() {
        let mesh = StructuredMesh::new(8, Rect::default()).unwrap();
        let space = EnrichedSpace::new(&mesh, Arc::new(Circle::centered(0.4)), Coefficient::new(1.0, 1.0).unwrap()).unwrap();
        let v = |p: Point| p.x * p.x + p.y;
        let ih = interpolate_ih(&space, &v);
        for (i, &p) in mesh.vertices().iter().enumerate() {
            if let Some(d) = space.vertex_dof(i) {
                assert_eq!(ih[d], v(p));
            }
        }
    }
}
