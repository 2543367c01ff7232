use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column '{column}': cannot parse '{value}' as a number")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("unknown label column '{0}'")]
    UnknownLabelColumn(String),

    #[error("data body is empty")]
    EmptyData,

    #[error("invalid label space: {0}")]
    InvalidLabelSpace(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("unknown label '{0}'")]
    UnknownLabel(String),

    #[error("label index {index} outside label space of size {size}")]
    LabelOutOfRange { index: usize, size: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite input value")]
    NonFinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("alpha {alpha} exceeds the bound (m-1)/m = {bound} for m = {m}")]
    AlphaBound { alpha: f64, bound: f64, m: usize },

    #[error("grid has {candidates} candidates, cap is {cap}")]
    GridCapExceeded { candidates: usize, cap: usize },

    #[error("could not place outlier {index} after {attempts} attempts")]
    OutlierPlacement { index: usize, attempts: usize },

    #[error("wrong rejector kind: expected {expected}, got {actual}")]
    WrongRejector {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("decision is not an abstention")]
    NotAbstained,

    #[error("model format error: {0}")]
    Format(String),
}

impl Error {
    /// Short machine-readable tag for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::NonNumeric { .. } => "non-numeric",
            Error::UnknownLabelColumn(_) => "unknown-label-column",
            Error::EmptyData => "empty-data",
            Error::InvalidLabelSpace(_) => "label-space",
            Error::InvalidDataset(_) => "dataset",
            Error::UnknownLabel(_) => "unknown-label",
            Error::LabelOutOfRange { .. } => "label-range",
            Error::DimensionMismatch { .. } => "dimension",
            Error::NonFinite => "non-finite",
            Error::InvalidParameter(_) => "parameter",
            Error::AlphaBound { .. } => "alpha-bound",
            Error::GridCapExceeded { .. } => "grid-cap",
            Error::OutlierPlacement { .. } => "outlier-placement",
            Error::WrongRejector { .. } => "rejector",
            Error::NotAbstained => "not-abstained",
            Error::Format(_) => "format",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
