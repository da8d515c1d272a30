//! Writes the discrete potential and the recovered flux as legacy VTK files
//! for ParaView.

use std::fs::File;
use std::io::BufWriter;

use eifem::prelude::*;
use eifem::vtk::{write_flux, write_solution};

fn main() -> Result<()> {
    let problem = circle_benchmark(100.0, 1.0)?;
    let mesh = StructuredMesh::new(32, Rect::default())?;
    let space = EnrichedSpace::new(&mesh, problem.level_set.clone(), problem.beta)?;
    let params = AssemblyParams::default();
    let system = assemble(&space, &problem, &params)?;
    let pre = AuxPreconditioner::new(&system, &AuxParams::default())?;
    let out = pcg(&system.matrix, &system.rhs, Some(&pre), &PcgParams::default())?;
    let field = system.field_from_dofs(&space, &out.x);
    let flux = recover_flux(&space, &problem, &field, &params);

    let dir = std::env::temp_dir();
    let solution = dir.join("eifem_solution.vtk");
    let velocity = dir.join("eifem_flux.vtk");
    write_solution(&space, &field, BufWriter::new(File::create(&solution)?))?;
    write_flux(&mesh, &flux, BufWriter::new(File::create(&velocity)?))?;
    println!("wrote {}", solution.display());
    println!("wrote {}", velocity.display());
    Ok(())
}
