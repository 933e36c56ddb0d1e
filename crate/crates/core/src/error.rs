use std::path::PathBuf;

use thiserror::Error;

use crate::cvt::CvtError;
use crate::format::FormatError;
use crate::raster::{PnmError, RasterError};
use crate::sampling::SamplingError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Image { path: PathBuf, source: PnmError },
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Cvt(#[from] CvtError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("first frame is entirely white, nothing to stipple")]
    AllWhite,
    #[error("gradient field has no mass above the threshold but {0} frequency sites were requested")]
    ZeroFrequencyMass(usize),
    #[error("no frames matching frame_<index>.ppm|pgm in {0}")]
    NoFrames(PathBuf),
    #[error("missing frame {index} in {dir} (frames must be contiguous from 0)")]
    MissingFrame { dir: PathBuf, index: usize },
    #[error("frame {index} appears twice: {first} and {second}")]
    DuplicateFrame {
        index: usize,
        first: PathBuf,
        second: PathBuf,
    },
    #[error("frame {index} is {found_w}x{found_h}, expected {width}x{height}")]
    FrameDimensions {
        index: usize,
        width: usize,
        height: usize,
        found_w: usize,
        found_h: usize,
    },
    #[error("checkpoint {path}: {msg}")]
    Checkpoint { path: PathBuf, msg: String },
    #[error("checkpoint {path} line {line}: {msg}")]
    CorruptCheckpoint {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("frame position {t} outside [0, {last}]")]
    FrameOutOfRange { t: f64, last: f64 },
    #[error("spectrum needs at least 16 points, got {0}")]
    TooFewPoints(usize),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Errors caused by bad user input rather than a defect.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Invariant(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
