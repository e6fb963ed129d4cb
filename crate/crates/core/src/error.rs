use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at `{path}` (line {line}, column {column}): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid scene: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected} values, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("sample time {sigma} s outside segment [0, {duration}] s")]
    OutOfRange { sigma: f64, duration: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("discontinuous trajectory between segments {index} and {next}: gap {gap:e}", next = .index + 1)]
    Discontinuous { index: usize, gap: f64 },

    #[error("unsupported shape pair: {0} vs {1}")]
    UnsupportedPair(&'static str, &'static str),

    #[error("empty acceleration range for joint {joint}; state dump: {dump}")]
    EmptyRange { joint: usize, dump: String },

    #[error("unreachable braking start for joint {joint}; state dump: {dump}")]
    Unreachable { joint: usize, dump: String },

    #[error("gate precondition failed ({kind}): {detail}")]
    Precondition { kind: &'static str, detail: String },

    #[error("gate invariant violated: {0}")]
    Invariant(String),

    #[error("metrics input mixes configurations ({0} vs {1})")]
    MixedConfig(String, String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// I/O error whose message names the file it concerns.
    pub fn io_at(path: &std::path::Path, e: std::io::Error) -> Error {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Dimension { .. } => "dimension",
            Error::OutOfRange { .. } => "out_of_range",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Discontinuous { .. } => "discontinuous",
            Error::UnsupportedPair(..) => "unsupported_pair",
            Error::EmptyRange { .. } => "empty_range",
            Error::Unreachable { .. } => "unreachable",
            Error::Precondition { .. } => "precondition",
            Error::Invariant(_) => "invariant",
            Error::MixedConfig(..) => "mixed_config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
