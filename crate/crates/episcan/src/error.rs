//! Crate-wide error type. Every failure mode carries enough context to be
//! reported as a machine-readable `{kind, message}` pair by the CLI.

use std::fmt;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// File could not be read or written.
    Io { path: PathBuf, source: std::io::Error },
    /// Dataset header is malformed (missing `Class` column, duplicates, ...).
    Header { path: PathBuf, detail: String },
    /// A genotype cell is outside {0,1,2}.
    GenotypeDomain {
        row: usize,
        column: usize,
        snp: String,
        found: String,
    },
    /// A class label is outside {0,1}.
    ClassDomain { row: usize, found: String },
    /// A data row has the wrong number of fields.
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    /// The dataset has zero rows of one class.
    MissingClass { class: &'static str },
    /// A domain type invariant was violated during construction.
    Invalid { detail: String },
    /// An operation precondition does not hold.
    Precondition { detail: String },
    /// A request exceeds a hard capacity limit (cell table size, enumeration range).
    Capacity { detail: String },
    /// Exact integer arithmetic overflowed the representable range.
    Overflow { detail: String },
    /// The simulator exhausted its rejection budget before filling both classes.
    Unsatisfiable { detail: String },
    /// A non-finite value surfaced in network arithmetic.
    Numeric { detail: String },
    /// A config file or CLI argument could not be interpreted.
    Config { detail: String },
    /// JSON (de)serialization failed.
    Json { detail: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn precondition(detail: impl Into<String>) -> Self {
        Error::Precondition {
            detail: detail.into(),
        }
    }

    pub fn invalid(detail: impl Into<String>) -> Self {
        Error::Invalid {
            detail: detail.into(),
        }
    }

    pub fn config(detail: impl Into<String>) -> Self {
        Error::Config {
            detail: detail.into(),
        }
    }

    /// Stable machine-readable tag for the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Header { .. } => "malformed_header",
            Error::GenotypeDomain { .. } => "genotype_domain",
            Error::ClassDomain { .. } => "class_domain",
            Error::RaggedRow { .. } => "ragged_row",
            Error::MissingClass { .. } => "missing_class",
            Error::Invalid { .. } => "invalid",
            Error::Precondition { .. } => "precondition",
            Error::Capacity { .. } => "capacity",
            Error::Overflow { .. } => "overflow",
            Error::Unsatisfiable { .. } => "unsatisfiable_simulation",
            Error::Numeric { .. } => "numeric_failure",
            Error::Config { .. } => "config",
            Error::Json { .. } => "json",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io { path, source } => write!(f, "{}: {}", path.display(), source),
            Error::Header { path, detail } => {
                write!(f, "{}: malformed header: {}", path.display(), detail)
            }
            Error::GenotypeDomain {
                row,
                column,
                snp,
                found,
            } => write!(
                f,
                "row {row}, column {column} ({snp}): genotype {found:?} outside {{0,1,2}}"
            ),
            Error::ClassDomain { row, found } => {
                write!(f, "row {row}: class {found:?} outside {{0,1}}")
            }
            Error::RaggedRow {
                row,
                expected,
                found,
            } => write!(f, "row {row}: expected {expected} fields, found {found}"),
            Error::MissingClass { class } => {
                write!(f, "dataset contains no {class} rows")
            }
            Error::Invalid { detail }
            | Error::Precondition { detail }
            | Error::Capacity { detail }
            | Error::Overflow { detail }
            | Error::Unsatisfiable { detail }
            | Error::Numeric { detail }
            | Error::Config { detail }
            | Error::Json { detail } => f.write_str(detail),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json {
            detail: e.to_string(),
        }
    }
}
