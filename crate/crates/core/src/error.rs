use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid dimensions {rows}x{cols}")]
    InvalidDims { rows: usize, cols: usize },

    #[error("position ({row}, {col}) is outside a {rows}x{cols} grid")]
    PositionOutOfGrid {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("image of {width}x{height} pixels cannot hold a {rows}x{cols} grid of {piece_size}px pieces")]
    ImageTooSmall {
        width: u32,
        height: u32,
        rows: usize,
        cols: usize,
        piece_size: usize,
    },

    #[error("piece size mismatch: expected {expected}, found {found}")]
    PieceSize { expected: usize, found: usize },

    #[error("expected {expected} pieces, found {found}")]
    PieceCount { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
