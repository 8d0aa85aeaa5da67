//! CLI errors and their exit codes.

use cone_ext::ConeError;
use thiserror::Error;

/// Exit code for command-line usage errors.
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config {path}: {message}")]
    Config { path: String, message: String },
    #[error("invalid input: {0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Cone(e) => match e {
                ConeError::RootOnBoundary { .. } => 2,
                ConeError::NotSymmetric { .. } => 3,
                ConeError::NotPositive { .. } => 4,
                ConeError::OddMultiplicity { .. } => 5,
                _ => 1,
            },
            _ => 1,
        }
    }

    /// Machine-readable error kind for JSON error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Cone(e) => match e {
                ConeError::Parse { .. } => "Parse",
                ConeError::RootOnBoundary { .. } => "RootOnBoundary",
                ConeError::NotSymmetric { .. } => "NotSymmetric",
                ConeError::NotPositive { .. } => "NotPositive",
                ConeError::OddMultiplicity { .. } => "OddMultiplicity",
                ConeError::NotScalar(_) => "NotScalar",
                _ => "ComputationError",
            },
            CliError::Io { .. } => "Io",
            CliError::Config { .. } => "Config",
            CliError::Input(_) => "Input",
        }
    }
}
