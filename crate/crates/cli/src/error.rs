use std::path::{Path, PathBuf};

use thiserror::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_INPUT: u8 = 4;
pub const EXIT_NOT_CONVERGED: u8 = 5;
pub const EXIT_INTERNAL: u8 = 6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {message}")]
    Input { context: String, message: String },
    #[error("campaign has no entries")]
    EmptyCampaign,
    #[error("workload of {n_qubits} qubits needs about {needed} bytes, budget is {budget} bytes")]
    OutOfMemory { n_qubits: usize, needed: u64, budget: u64 },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn input(context: impl Into<String>, message: impl ToString) -> Self {
        CliError::Input {
            context: context.into(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
            CliError::Input { .. } | CliError::EmptyCampaign | CliError::OutOfMemory { .. } => EXIT_INPUT,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

/// Classifies estimator failures: bad references or settings are input errors,
/// anything else means the numerics broke.
pub fn from_bpde(context: &str, e: bpde_core::BpdeError) -> CliError {
    use bpde_core::BpdeError::*;
    match e {
        IdenticalReferences | ParticleNumberMismatch(..) | LengthMismatch { .. } | InvalidConfig(_) | Qubit(_) => {
            CliError::input(context, e)
        }
        other => CliError::Internal(format!("{context}: {other}")),
    }
}
