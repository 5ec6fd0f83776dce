use thiserror::Error;

use crate::bitio::BitIoError;

/// Everything that can go wrong inside the codec.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    BitIo(#[from] BitIoError),

    #[error("invalid codec parameters: {0}")]
    InvalidParams(String),

    #[error("symbol {symbol} has zero frequency in the active table")]
    ZeroFrequency { symbol: usize },

    #[error("invalid frequency table: {0}")]
    InvalidTable(String),

    #[error("cannot give {present} symbols a nonzero frequency out of a total of {total}")]
    Infeasible { present: usize, total: u64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("extraction desynchronized at position {position}: {reason}")]
    Desync { position: usize, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn desync(position: usize, reason: impl Into<String>) -> Self {
        Error::Desync {
            position,
            reason: reason.into(),
        }
    }
}
