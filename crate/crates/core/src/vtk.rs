//! Legacy ASCII VTK output (unstructured triangle grids).

use std::io::Write;

use crate::error::Result;
use crate::flux::RecoveredFlux;
use crate::geometry::centroid;
use crate::mesh::StructuredMesh;
use crate::space::{DiscreteField, EnrichedSpace};

fn write_grid<W: Write>(mesh: &StructuredMesh, title: &str, out: &mut W) -> Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.num_vertices())?;
    for p in mesh.vertices() {
        writeln!(out, "{:.17e} {:.17e} 0", p.x, p.y)?;
    }
    let ne = mesh.num_elements();
    writeln!(out, "CELLS {} {}", ne, 4 * ne)?;
    for t in mesh.triangles() {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(out, "CELL_TYPES {ne}")?;
    for _ in 0..ne {
        writeln!(out, "5")?;
    }
    Ok(())
}

/// Nodal values, element constants, centroid values and interface flags.
pub fn write_solution<W: Write>(space: &EnrichedSpace<'_>, field: &DiscreteField, mut out: W) -> Result<()> {
    let mesh = space.mesh();
    write_grid(mesh, "eifem solution", &mut out)?;
    writeln!(out, "POINT_DATA {}", mesh.num_vertices())?;
    writeln!(out, "SCALARS p_nodal double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for v in &field.vertex_values {
        writeln!(out, "{v:.17e}")?;
    }
    writeln!(out, "CELL_DATA {}", mesh.num_elements())?;
    writeln!(out, "SCALARS p_centroid double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for t in 0..mesh.num_elements() {
        let c = centroid(&mesh.triangle(t));
        writeln!(out, "{:.17e}", field.value(space, t, c))?;
    }
    writeln!(out, "SCALARS p_constant double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for c in &field.constants {
        writeln!(out, "{c:.17e}")?;
    }
    writeln!(out, "SCALARS interface int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for t in 0..mesh.num_elements() {
        writeln!(out, "{}", u8::from(space.is_interface(t)))?;
    }
    Ok(())
}

/// Flux evaluated at element centroids, with its elementwise divergence.
pub fn write_flux<W: Write>(mesh: &StructuredMesh, flux: &RecoveredFlux, mut out: W) -> Result<()> {
    write_grid(mesh, "eifem recovered flux", &mut out)?;
    writeln!(out, "CELL_DATA {}", mesh.num_elements())?;
    writeln!(out, "VECTORS flux double")?;
    for t in 0..mesh.num_elements() {
        let u = flux.value(mesh, t, centroid(&mesh.triangle(t)));
        writeln!(out, "{:.17e} {:.17e} 0", u.x, u.y)?;
    }
    writeln!(out, "SCALARS divergence double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for t in 0..mesh.num_elements() {
        writeln!(out, "{:.17e}", flux.divergence(mesh, t))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Circle;
    use crate::mesh::Rect;
    use crate::problems::Coefficient;
    use crate::space::nodal_field;
    use std::sync::Arc;

    #[test]
    fn solution_file_layout() {
        let mesh = StructuredMesh::new(8, Rect::default()).unwrap();
        let space = EnrichedSpace::new(&mesh, Arc::new(Circle::centered(0.4)), Coefficient::new(1.0, 1.0).unwrap()).unwrap();
        let f = nodal_field(&space, &|p| p.x);
        let mut buf = Vec::new();
        write_solution(&space, &f, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(s.contains("POINTS 81 double"));
        assert!(s.contains("CELLS 128 512"));
        assert!(s.contains("CELL_DATA 128"));
    }

    #[test]
    fn flux_file_has_vectors() {
        let mesh = StructuredMesh::new(2, Rect::default()).unwrap();
        let u = RecoveredFlux::interpolate(&mesh, &|_| crate::geometry::Point::new(1.0, 0.0));
        let mut buf = Vec::new();
        write_flux(&mesh, &u, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let vectors: Vec<&str> = s.lines().skip_while(|l| !l.starts_with("VECTORS")).skip(1).take(8).collect();
        assert_eq!(vectors.len(), 8);
        for v in vectors {
            let x: f64 = v.split_whitespace().next().unwrap().parse().unwrap();
            assert!((x - 1.0).abs() < 1e-12);
        }
    }
}
