//! Enriched immersed finite elements (EIFEM) for second-order elliptic
//! interface problems.
//!
//! The interface is given by a level set and is not fitted by the mesh.
//! Interface triangles carry the immersed piecewise-linear basis, every
//! element carries one extra constant degree of freedom, and the discrete
//! problem is an interior-penalty form over all edges. The recovered
//! lowest-order Raviart–Thomas flux is locally conservative, and the linear
//! system is solved by conjugate gradients preconditioned with Gauss–Seidel
//! smoothing plus block algebraic multigrid.
//!
//! A typical pipeline:
//!
//! ```
//! use eifem::prelude::*;
//!
//! let problem = circle_benchmark(10.0, 1.0).unwrap();
//! let mesh = StructuredMesh::new(16, Rect::default()).unwrap();
//! let space = EnrichedSpace::new(&mesh, problem.level_set.clone(), problem.beta).unwrap();
//! let system = assemble(&space, &problem, &AssemblyParams::default()).unwrap();
//! let pre = AuxPreconditioner::new(&system, &AuxParams::default()).unwrap();
//! let out = pcg(&system.matrix, &system.rhs, Some(&pre), &PcgParams::default()).unwrap();
//! let field = system.field_from_dofs(&space, &out.x);
//! let flux = recover_flux(&space, &problem, &field, &AssemblyParams::default());
//! let report = conservation_report(&mesh, &flux, &system.element_source);
//! assert!(report.max < 1e-5);
//! ```

pub mod analysis;
pub mod assembly;
pub mod config;
pub mod driver;
pub mod error;
pub mod flux;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod space;
pub mod vtk;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::analysis::{error_energy, error_flux, error_l2, fit_orders, ErrorReport, ErrorRow};
    pub use crate::assembly::{assemble, AssemblyParams, BlockSparseSystem, Theta};
    pub use crate::flux::{conservation_report, recover_flux, ConservationReport, RecoveredFlux};
    pub use crate::geometry::{Circle, LevelSet, Point, Side};
    pub use crate::linalg::SparseMatrix;
    pub use crate::mesh::{Rect, StructuredMesh};
    pub use crate::problems::{circle_benchmark, Coefficient, ProblemSpec};
    pub use crate::solver::{pcg, AmgHierarchy, AmgParams, AuxParams, AuxPreconditioner, PcgParams, Preconditioner};
    pub use crate::space::{DiscreteField, EnrichedSpace};
    pub use crate::{Error, Result};
}
