//! Library side of the `gp-acquire` command-line tool: config loading, CSV
//! and SVG output, and the verification suites.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::process::ExitCode;

pub mod commands;
pub mod config;
pub mod svg;
pub mod table;
pub mod verify;

/// Failure of a CLI command, carrying the process exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad config file or flags (exit 2).
    Config(String),
    /// Output could not be written (exit 2).
    Io(String),
    /// A computation failed on valid input (exit 3).
    Numerical(String),
    /// A verification check failed (exit 1).
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gp_acquire::Error> for CliError {
    fn from(e: gp_acquire::Error) -> Self {
        use gp_acquire::Error as E;
        match e {
            E::Singular { .. } | E::ZeroPrecision { .. } | E::Divergence { .. } | E::MissingSignalValue { .. } => {
                CliError::Numerical(e.to_string())
            }
            E::IndexOutOfRange { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}
