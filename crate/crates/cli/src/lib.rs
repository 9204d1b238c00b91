//! Command-line front end for `marec`: recursion tables, simulation,
//! estimation, the grid experiment, and heatmap rendering.

pub mod commands;
pub mod formats;

use thiserror::Error;

pub use commands::{run, Cli};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<marec::Error> for CliError {
    fn from(e: marec::Error) -> Self {
        match e {
            marec::Error::Singular { .. } | marec::Error::Overflow { .. } | marec::Error::BoundaryRoot { .. } => {
                CliError::Numerical(e.to_string())
            }
            marec::Error::Validation(_) | marec::Error::Dimension(_) | marec::Error::InsufficientData(_) => {
                CliError::Usage(e.to_string())
            }
        }
    }
}
