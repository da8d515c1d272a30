//! Sparse and small dense kernels shared by assembly and the solvers.

pub mod dense;
pub mod mtx;
pub mod sparse;

pub use dense::{dense_solve, DenseMatrix, DenseSolver};
pub use mtx::{read_matrix_market, read_vector, write_matrix_market, write_vector};
pub use sparse::{axpy, dot, norm2, CooBuilder, SparseMatrix};
