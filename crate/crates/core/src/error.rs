use std::path::PathBuf;

/// Errors produced by the factorization, TV and harness layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{op}: dimension mismatch between {left_rows}x{left_cols} and {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("pixel ({i}, {j}) assigned to rows {first} and {second}")]
    DuplicatePixel {
        i: usize,
        j: usize,
        first: usize,
        second: usize,
    },

    #[error("vanishing local gradient at row {row}, column {col} with eps_tv = 0")]
    VanishingGradient { row: usize, col: usize },

    #[error("empty mini-batch")]
    EmptyBatch,

    #[error("singular value decomposition failed: {0}")]
    Svd(String),

    #[error("degenerate contingency table: {0}")]
    DegenerateTable(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    ) -> Self {
        Error::DimensionMismatch {
            op,
            left_rows: left.0,
            left_cols: left.1,
            right_rows: right.0,
            right_cols: right.1,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
