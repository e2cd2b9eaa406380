//! Command-line front end: dataset ingestion and synthesis, embedding runs,
//! metric evaluation, filtration dumps, SVG scatter plots, and an exact
//! verification suite for the measure laws.

pub mod args;
pub mod commands;
pub mod dataset;
pub mod jsonio;
pub mod schema;
pub mod svg;

use fuzzydr_core::embed::EmbedError;
use fuzzydr_core::eval::EvalError;
use thiserror::Error;

/// Failure classes mapped one-to-one onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad flag values, or an invalid configuration. Exit 1.
    #[error("{0}")]
    Usage(String),
    /// Unreadable, malformed, or mismatched input data. Exit 2.
    #[error("{0}")]
    Data(String),
    /// Numeric breakdown during a computation. Exit 3.
    #[error("{0}")]
    Numeric(String),
    /// One or more verification laws failed. Exit 4.
    #[error("law failures: {}", .0.join(", "))]
    LawFailure(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::LawFailure(_) => 4,
        }
    }
}

impl From<EmbedError> for CliError {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::BadNeighborCount { .. } | EmbedError::BadOutputDim { .. } => {
                CliError::Usage(e.to_string())
            }
            EmbedError::TooFewPoints { .. } => CliError::Data(e.to_string()),
            EmbedError::DegenerateNeighborhood { .. } | EmbedError::NumericBreakdown { .. } => {
                CliError::Numeric(e.to_string())
            }
            EmbedError::Filtration(_) | EmbedError::Scale(_) => CliError::Data(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::BadNeighborCount { .. } => CliError::Usage(e.to_string()),
            EvalError::SizeMismatch { .. }
            | EvalError::CapExceeded { .. }
            | EvalError::TooFewPoints { .. } => CliError::Data(e.to_string()),
            EvalError::ZeroNorm => CliError::Numeric(e.to_string()),
            EvalError::Embed(inner) => inner.into(),
        }
    }
}

/// Dispatches a parsed invocation. The caller maps the error to an exit code.
pub fn run(cli: args::Cli) -> Result<(), CliError> {
    match cli.command {
        args::Command::Embed(a) => commands::embed::run(&a),
        args::Command::Eval(a) => commands::eval::run(&a),
        args::Command::PosetLab(a) => commands::posetlab::run(&a),
        args::Command::Filtration(a) => commands::filtration::run(&a),
    }
}
