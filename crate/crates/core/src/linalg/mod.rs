//! Sparse storage, block composition and direct solves.

mod block;
mod lu;
mod sparse;

pub use block::{apply_essential, BlockStructure};
pub use lu::{lu_factor, relative_residual, LuFactors, LuSymbolic, DIAGONAL_PREFERENCE, PIVOT_THRESHOLD};
pub use sparse::SparseMatrix;
