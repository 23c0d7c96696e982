//! Crate-wide error type.

use thiserror::Error;

/// Why a rendered sample was rejected by the generator gate.
#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    /// A projected joint fell outside the image bounds.
    JointOutsideImage { joint: usize, u: f64, v: f64 },
    /// Foreground fraction fell outside the accepted operating range.
    ForegroundFraction { fraction: f64 },
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::JointOutsideImage { joint, u, v } => {
                write!(f, "joint {joint} projects outside the image at ({u:.1}, {v:.1})")
            }
            RejectReason::ForegroundFraction { fraction } => {
                write!(f, "foreground fraction {fraction:.4} outside [0.02, 0.30]")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("joint {joint} angle {angle} outside limits [{lo}, {hi}]")]
    LimitViolation { joint: usize, angle: f64, lo: f64, hi: f64 },

    #[error("configuration has {got} angles, chain has {expected} joints")]
    ConfigLength { got: usize, expected: usize },

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid camera: {0}")]
    InvalidCamera(String),

    #[error("point has non-positive depth z = {z}")]
    BehindCamera { z: f64 },

    #[error("sample rejected: {0}")]
    SampleRejected(RejectReason),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("dataset is empty: {0}")]
    EmptyDataset(String),

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("schedule epoch {epoch} out of range [0, {total})")]
    ScheduleRange { epoch: usize, total: usize },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("generator config error: {0}")]
    Generator(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
