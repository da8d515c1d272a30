use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh size must be at least 2 squares per side, got {0}")]
    InvalidSize(usize),

    #[error("level set does not change sign on the segment")]
    NoSignChange,

    #[error("interface crosses element {element:?} more than once at this resolution")]
    DegenerateCut { element: Option<usize> },

    #[error("cut produces a sliver sub-element (area fraction {fraction:e})")]
    SliverSubElement { fraction: f64 },

    #[error("immersed basis system is singular (condition estimate {condition:e})")]
    SingularBasisSystem { condition: f64 },

    #[error("point lies outside element {element}")]
    PointOutsideElement { element: usize },

    #[error("non-finite entry in local matrix of {location}")]
    AssemblyFailure { location: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },

    #[error("multigrid setup failed: {0}")]
    SetupFailure(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not converged after {iterations} iterations (relative residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("preconditioner is not positive definite (<z, r> = {0:e})")]
    IndefinitePreconditioner(f64),

    #[error("matrix is not positive definite (<p, Ap> = {0:e})")]
    IndefiniteMatrix(f64),

    #[error("mesh sequence is not a halving refinement")]
    NonHalvingSequence,

    #[error("manufactured solution defect {defect:e} in {check}")]
    ManufacturedDefect { check: String, defect: f64 },

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
