//! Target grids and the vibrotactile position code.
//!
//! A target `(ix, iy)` is sent as two sequential segments: the vertical
//! coordinate on the Top/Bottom motors, an inter-axis pause, then the
//! horizontal coordinate on the Left/Right motors. Each axis uses either a
//! discrete code (pulse count) or a continuous code (pulse length). A zero
//! coordinate is a short pulse on each motor of the axis.

mod codec;
mod grid;
mod train;

pub(crate) use codec::{decode_segment, nearest_bin};
pub use codec::{decode_train, encode_axis, encode_target, DecodeError};
pub use grid::{index_to_position, make_grid, nearest_target, GridSpec, Hit, Point, TargetIndex};
pub use train::{
    train_duration, Axis, AxisCode, ContinuousMap, EncodingParams, EncodingScheme, Motor,
    PulseEvent, PulseTrain, TrainDocument,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodingError {
    #[error("grid density must be odd and at least 3, got {0}")]
    InvalidDensity(u32),
    #[error("frame size must be positive, got {0} cm")]
    InvalidFrame(f64),
    #[error("coordinate {value} outside +/-{max_index}")]
    OutOfBounds { value: i32, max_index: i32 },
    #[error("invalid encoding parameters: {0}")]
    InvalidParams(&'static str),
    #[error("pulse train is empty")]
    EmptyTrain,
    #[error("unknown encoding scheme {0:?}")]
    UnknownScheme(String),
}
