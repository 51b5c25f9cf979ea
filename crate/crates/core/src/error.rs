//! Error types shared across the pipeline.

use thiserror::Error;

/// Errors raised while reading a program: lexing, parsing, or the structural
/// checks that decide whether the loop is in the supported class.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FrontendError {
    /// The text is not a well-formed program.
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    /// The program parses but falls outside the supported loop class, so no
    /// moment closed forms exist and the analysis refuses it up front.
    #[error("unsupported program: {message}")]
    NotSupported { message: String },
}

impl FrontendError {
    pub fn syntax(line: usize, message: impl Into<String>) -> FrontendError {
        FrontendError::Syntax { line, message: message.into() }
    }

    pub fn not_supported(message: impl Into<String>) -> FrontendError {
        FrontendError::NotSupported { message: message.into() }
    }
}

/// Recoverable analysis failures. Every variant maps to an `Unknown` verdict
/// with a diagnostic; none of them can produce a wrong certificate.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AnalysisError {
    /// Expanding the per-step distribution of an expression exceeded the
    /// configured branch budget.
    #[error("one-step distribution needs {needed} branches, over the cap of {cap}")]
    BranchExplosion { needed: usize, cap: usize },

    /// The monomial closure of the guard exceeded the configured budget.
    #[error("monomial universe needs more than {cap} monomials")]
    UniverseExplosion { cap: usize },

    /// A coefficient's sign depends on the unknown symbolic constants, so no
    /// sound bound substitution exists for it.
    #[error("sign of {expression} is ambiguous")]
    AmbiguousSign { expression: String },

    /// A limit or comparison depends on the unknown symbolic constants.
    #[error("{what} depends on symbolic constants")]
    SymbolicAmbiguity { what: String },

    /// The configured time budget ran out mid-analysis.
    #[error("analysis timed out after {seconds}s")]
    Timeout { seconds: u64 },
}
