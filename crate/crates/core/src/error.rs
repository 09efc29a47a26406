use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed frontmatter at line {line}: {reason}")]
    MalformedFrontmatter { line: usize, reason: String },

    /// Syntax or schema error in a structured contract source file.
    #[error("contract source line {line}, column {column}: {message}")]
    Source {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid rule set: {0}")]
    RuleSet(String),

    #[error("rule `{rule_id}`: {message}")]
    Pattern { rule_id: String, message: String },

    #[error("tool registry: {0}")]
    Registry(String),

    #[error("transcript line {line}: {message}")]
    Transcript { line: usize, message: String },

    #[error("transcript `{run_id}` violates an invariant: {message}")]
    InvariantViolation { run_id: String, message: String },

    #[error("judge records, row {row}: {message}")]
    Records { row: usize, message: String },

    /// Records that cannot be aggregated as asked, such as two rows with the
    /// same pairing key.
    #[error("aggregation: {0}")]
    Aggregate(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
