//! Driver for the chmhd solver: convergence studies, energy checks and plain
//! simulations configured from JSON.

pub mod config;
pub mod output;
pub mod run;

use std::path::Path;

pub use config::{Initial, Mode, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] chmhd::Error),
    #[error("step {step}: {source}")]
    Step { step: usize, source: chmhd::Error },
    #[error("level n = {n}: {source}")]
    Level { n: usize, source: Box<CliError> },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }

    /// 2 for an aborted Picard iteration, 4 for configuration problems, 1
    /// otherwise. (3, the energy check failing, is not an error.)
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 4,
            Self::Solver(chmhd::Error::PicardNonConvergence { .. })
            | Self::Step { source: chmhd::Error::PicardNonConvergence { .. }, .. } => 2,
            Self::Level { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}
