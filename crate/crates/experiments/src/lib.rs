//! Experiment driver: declarative JSON configs, a registry of seeded
//! experiments over the filtering stack, CSV/JSON artifact emission with a
//! checksum manifest, and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod csvio;
pub mod manifest;
pub mod registry;
pub mod riccati;
pub mod runner;
pub mod suites;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown experiment `{0}` (see `qflab list`)")]
    ExperimentUnknown(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::ExperimentUnknown(_) => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Io(_) => "io",
        }
    }

    /// Process exit code: 2 config, 3 numeric or i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ExperimentUnknown(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

macro_rules! numeric_from {
    ($($ty:ty),*) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Numeric(e.to_string())
            }
        })*
    };
}

numeric_from!(
    qflab::qp::QpError,
    qflab::slh::SlhError,
    qflab::master_eq::MasterEqError,
    qflab::belavkin::BelavkinError,
    qflab::classical::ClassicalError,
    qflab::pointer::PointerError,
    qflab::ito::ItoError
);
