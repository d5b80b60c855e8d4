use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = TvrError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum TvrError {
    #[error("block size {k} does not tile an image of side {n}")]
    Tiling { n: usize, k: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("intensity {value} at index {index} is outside [0, 1]")]
    Range { index: usize, value: f64 },

    #[error("mask entry {value} at index {index} is not 0 or 1")]
    NonBinary { index: usize, value: f64 },

    #[error("mask is not constant over block {block} of channel {channel}")]
    NotBlockConstant { channel: usize, block: usize },

    #[error("total variation needs a block side of at least 2, got {0}")]
    DegenerateBlock(usize),

    #[error("quartiles need at least 4 blocks per channel, got {0}")]
    TooFewBlocks(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("flag ({channel}, {block}) is out of range for {blocks} blocks")]
    FlagIndex {
        channel: usize,
        block: usize,
        blocks: usize,
    },

    #[error("could not place {count} disjoint patches of side {side} in {attempts} attempts")]
    Placement { count: usize, side: usize, attempts: usize },

    #[error("unknown inpainting method `{0}`")]
    UnknownInpainter(String),

    #[error("external generator failed: {0}")]
    Bridge(String),

    #[error("unsupported image {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
