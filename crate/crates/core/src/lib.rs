//! Finite element solver for the coupled Cahn-Hilliard / magnetohydrodynamics
//! system on the unit square.
//!
//! The discretization uses P2 elements for the phase field, chemical
//! potential, velocity and magnetic field and P1 for the pressure. Time
//! stepping is a first-order convex-splitting scheme whose nonlinear systems
//! are solved by a block Picard iteration (phase block, then flow/induction
//! block).

pub mod basis;
pub mod forms;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod scheme;
pub mod space;
pub mod verify;

pub use mesh::{Mesh, Point};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate element (det J = {det:e})")]
    DegenerateElement { det: f64 },
    #[error("fill-reducing ordering failed: {0}")]
    Ordering(String),
    #[error("matrix is numerically singular at column {index} (largest pivot candidate {pivot:e})")]
    SingularMatrix { index: usize, pivot: f64 },
    #[error("coefficient {name} = {value:e} is not positive (phase value {phi:e})")]
    NonPositiveCoefficient { name: &'static str, value: f64, phi: f64 },
    #[error("Picard iteration did not converge in {iterations} iterations (increment {increment:e})")]
    PicardNonConvergence { iterations: usize, increment: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
