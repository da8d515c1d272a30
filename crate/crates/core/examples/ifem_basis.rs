//! Builds the immersed basis on one cut triangle and checks its defining
//! conditions: nodal values, continuity at the cut points and flux
//! continuity across the chord.

use eifem::geometry::{classify_element, Circle, ElementKind, Point};
use eifem::prelude::*;
use eifem::space::{basis_residuals, build_cut_element, build_local_basis};

fn main() -> Result<()> {
    let circle = Circle::centered(0.4);
    let tri = [Point::new(0.25, 0.25), Point::new(0.375, 0.25), Point::new(0.375, 0.375)];
    let h = 0.125;
    let ElementKind::Interface(segment) = classify_element(&circle, tri, h)? else {
        println!("triangle is not cut");
        return Ok(());
    };
    let cut = build_cut_element(0, tri, segment, &circle)?;
    println!("chord from ({:.4}, {:.4}) to ({:.4}, {:.4})", segment.e1.x, segment.e1.y, segment.e2.x, segment.e2.y);
    println!("vertex sides {:?}, areas minus {:.5} plus {:.5}", cut.vertex_sides, cut.area_minus, cut.area_plus);

    let basis = build_local_basis(&tri, &cut, Coefficient::new(1.0, 100.0)?)?;
    for j in 0..3 {
        let m = basis.piece(j, Side::Minus);
        let p = basis.piece(j, Side::Plus);
        println!(
            "phi_{j}: grad- = ({:+.4}, {:+.4})  grad+ = ({:+.4}, {:+.4})",
            m.b, m.c, p.b, p.c
        );
    }
    let r = basis_residuals(&tri, &basis);
    println!(
        "residuals: nodal {:.1e}, continuity {:.1e}, flux {:.1e}, partition of unity {:.1e}",
        r.nodal, r.continuity, r.flux, r.partition_of_unity
    );
    Ok(())
}
