use std::sync::Arc;

use eifem::analysis::{error_l2, error_l2_with};
use eifem::assembly::{assemble, assemble_with, AssemblyParams};
use eifem::flux::{conservation_report, recover_flux_with};
use eifem::geometry::{FnLevelSet, LevelSet, Point};
use eifem::mesh::{Rect, StructuredMesh};
use eifem::problems::{circle_benchmark, Coefficient};
use eifem::quadrature::TriangleRule;
use eifem::solver::{pcg, AuxParams, AuxPreconditioner, PcgParams};
use eifem::space::{interpolate_pih, DiscreteField, EnrichedSpace};

const LINE_X: f64 = 0.137;

/// Vertical interface `x = LINE_X`, minus side on the left.
fn vertical_line() -> Arc<dyn LevelSet> {
    Arc::new(FnLevelSet {
        value: |p: Point| p.x - LINE_X,
        gradient: |_p: Point| Point::new(1.0, 0.0),
        name: "vertical line".into(),
    })
}

/// Piecewise linear potential with `-β∇p = (-1, 0)` on both sides.
fn kinked_potential(beta: Coefficient) -> impl Fn(Point) -> f64 + Copy {
    move |p: Point| {
        if p.x < LINE_X {
            p.x / beta.minus
        } else {
            (p.x - LINE_X) / beta.plus + LINE_X / beta.minus
        }
    }
}

fn tight() -> PcgParams {
    PcgParams {
        rtol: 1e-13,
        maxit: 500,
        ..PcgParams::default()
    }
}

fn solve(space: &EnrichedSpace<'_>, source: &dyn Fn(Point) -> f64, g: &dyn Fn(Point) -> f64) -> (DiscreteField, eifem::assembly::BlockSparseSystem) {
    let system = assemble_with(space, source, g, &AssemblyParams::default()).unwrap();
    let pre = AuxPreconditioner::new(&system, &AuxParams::default()).unwrap();
    let out = pcg(&system.matrix, &system.rhs, Some(&pre), &tight()).unwrap();
    assert!(out.converged);
    (system.field_from_dofs(space, &out.x), system)
}

#[test]
fn linear_patch_test_is_exact() {
    let mesh = StructuredMesh::new(8, Rect::default()).unwrap();
    let ls = vertical_line();
    let beta = Coefficient::new(1.0, 1.0).unwrap();
    let space = EnrichedSpace::new(&mesh, ls, beta).unwrap();
    let p = |q: Point| 1.0 + 2.0 * q.x - 3.0 * q.y;
    let (field, _) = solve(&space, &|_| 0.0, &p);
    assert!(error_l2(&space, &field, &p) < 1e-10);
    assert!(field.constants.iter().all(|c| c.abs() < 1e-10));
}

#[test]
fn kinked_solution_across_straight_interface_is_exact() {
    let mesh = StructuredMesh::new(8, Rect::default()).unwrap();
    let beta = Coefficient::new(10.0, 1.0).unwrap();
    let space = EnrichedSpace::new(&mesh, vertical_line(), beta).unwrap();
    assert!(space.interface_elements().count() > 0);
    let p = kinked_potential(beta);
    let (field, _) = solve(&space, &|_| 0.0, &p);
    assert!(error_l2(&space, &field, &p) < 1e-10);
}

#[test]
fn recovered_flux_of_kinked_solution_is_constant() {
    let mesh = StructuredMesh::new(8, Rect::default()).unwrap();
    let beta = Coefficient::new(1.0, 100.0).unwrap();
    let space = EnrichedSpace::new(&mesh, vertical_line(), beta).unwrap();
    let p = kinked_potential(beta);
    let (field, system) = solve(&space, &|_| 0.0, &p);
    let flux = recover_flux_with(&space, &field, &p, &AssemblyParams::default());
    for t in 0..mesh.num_elements() {
        let tri = mesh.triangle(t);
        for q in tri {
            let c = (tri[0] + tri[1] + tri[2]) * (1.0 / 3.0);
            let u = flux.value(&mesh, t, c * 0.5 + q * 0.5);
            assert!((u.x + 1.0).abs() < 1e-8 && u.y.abs() < 1e-8, "element {t}: {u:?}");
        }
    }
    assert!(conservation_report(&mesh, &flux, &system.element_source).max < 1e-10);
}

#[test]
fn interpolant_converges_at_second_order() {
    let problem = circle_benchmark(10.0, 1.0).unwrap();
    let errors: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&n| {
            let mesh = StructuredMesh::new(n, Rect::default()).unwrap();
            let space = EnrichedSpace::new(&mesh, problem.level_set.clone(), problem.beta).unwrap();
            let pi = interpolate_pih(&space, &*problem.exact_p);
            error_l2(&space, &pi, &*problem.exact_p)
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 1.8, "orders from {errors:?}");
    }
}

#[test]
fn error_norm_does_not_depend_on_quadrature() {
    let problem = circle_benchmark(100.0, 1.0).unwrap();
    let mesh = StructuredMesh::new(32, Rect::default()).unwrap();
    let space = EnrichedSpace::new(&mesh, problem.level_set.clone(), problem.beta).unwrap();
    let system = assemble(&space, &problem, &AssemblyParams::default()).unwrap();
    let pre = AuxPreconditioner::new(&system, &AuxParams::default()).unwrap();
    let out = pcg(&system.matrix, &system.rhs, Some(&pre), &tight()).unwrap();
    let field = system.field_from_dofs(&space, &out.x);
    let coarse = error_l2_with(&space, &field, &*problem.exact_p, &TriangleRule::degree4());
    let fine = error_l2_with(&space, &field, &*problem.exact_p, &TriangleRule::collapsed(12));
    assert!((coarse - fine).abs() <= 1e-3 * fine, "{coarse} vs {fine}");
}

#[test]
fn rhs_quadrature_degree_leaves_matrix_unchanged() {
    let problem = circle_benchmark(1000.0, 1.0).unwrap();
    let mesh = StructuredMesh::new(16, Rect::default()).unwrap();
    let space = EnrichedSpace::new(&mesh, problem.level_set.clone(), problem.beta).unwrap();
    let low = AssemblyParams {
        volume_degree: 2,
        ..AssemblyParams::default()
    };
    let a = assemble(&space, &problem, &low).unwrap();
    let b = assemble(&space, &problem, &AssemblyParams::default()).unwrap();
    let diff = a.matrix.triplets().map(|(i, j, v)| (v - b.matrix.get(i, j)).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-12 * b.matrix.max_abs());
}
