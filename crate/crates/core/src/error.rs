use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, MdeError>;

#[derive(Debug, Error)]
pub enum MdeError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("could not read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("empty file: {0}")]
    EmptyFile(String),

    #[error("row {row}, column {column:?}: cannot parse {value:?} as a number")]
    Parse {
        /// 1-based data row (the header is row 0).
        row: usize,
        column: String,
        value: String,
    },

    #[error("response column {0:?} not found")]
    MissingColumn(String),

    #[error("{what} cap exceeded: {got} > {limit}")]
    CapExceeded {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("{0} coincides with a zero of the coordinate objective")]
    OnKink(f64),
}

impl MdeError {
    /// True for errors caused by the input data or files rather than by the
    /// caller's configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            MdeError::Shape(_)
                | MdeError::NonFinite { .. }
                | MdeError::InvalidData(_)
                | MdeError::Io { .. }
                | MdeError::Csv(_)
                | MdeError::EmptyFile(_)
                | MdeError::Parse { .. }
                | MdeError::MissingColumn(_)
        )
    }
}
