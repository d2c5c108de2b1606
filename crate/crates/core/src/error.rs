use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the toolkit.
///
/// Variants are grouped by the stage that produces them; the CLI maps every
/// variant except [`Error::Config`] to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("format error in {context}: {message}")]
    Format { context: String, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("projection overflow: angle {0} rad is outside the half-space in front of the camera")]
    ProjectionOverflow(f64),
    #[error("mask is empty after clipping to the image")]
    EmptyMask,

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("model for `{0}` is degenerate and cannot qualify candidates")]
    Unqualifiable(String),
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("empty pool: {0}")]
    EmptyPool(&'static str),

    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("invalid episode: {0}")]
    InvalidEpisode(String),

    #[error("worker: {0}")]
    Worker(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        let path = path.as_ref().display().to_string();
        if source.kind() == io::ErrorKind::NotFound {
            Error::NotFound(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn format(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Format {
            context: context.into(),
            message: message.to_string(),
        }
    }

    /// Short, stable name of the variant, used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotFound(_) => "NotFound",
            Error::Format { .. } => "FormatError",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Config(_) => "ConfigError",
            Error::UnknownNode(_) => "UnknownNode",
            Error::DegenerateGeometry(_) => "DegenerateGeometry",
            Error::ProjectionOverflow(_) => "ProjectionOverflow",
            Error::EmptyMask => "EmptyMask",
            Error::InsufficientData { .. } => "InsufficientData",
            Error::Unqualifiable(_) => "Unqualifiable",
            Error::EmptyInput(_) => "EmptyInput",
            Error::EmptyPool(_) => "EmptyPool",
            Error::InvalidAction(_) => "InvalidAction",
            Error::InvalidEpisode(_) => "InvalidEpisode",
            Error::Worker(_) => "WorkerError",
            Error::Io { .. } => "IoError",
        }
    }
}
