//! Host side of the wristband link: frame codec, clocks, devices and
//! timed playback of pulse trains.

mod clock;
mod frame;
mod mock;
mod playback;
mod serial;

pub use clock::{Clock, MonotonicClock, VirtualClock};
pub use frame::{
    checksum, intensity_byte, serialize_frame, DeviceFrame, FrameError, FRAME_LEN, OP_PULSE, SYNC,
};
pub use mock::{mock_device, MockDevice};
pub use playback::{play, spawn_playback, CancelToken, PlaybackError, PlaybackHandle};
pub use serial::{open_serial, SerialDevice, BAUD_RATE};

use crate::encoding::Motor;
use serde::{Deserialize, Serialize};

/// Sink for encoded frames. Writes are open-loop: no acknowledgement.
pub trait Device: Send {
    fn write_frame(&mut self, frame: &[u8; FRAME_LEN]) -> std::io::Result<()>;
}

impl<D: Device + ?Sized> Device for Box<D> {
    fn write_frame(&mut self, frame: &[u8; FRAME_LEN]) -> std::io::Result<()> {
        (**self).write_frame(frame)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelineEntry {
    pub host_time_ms: f64,
    pub frame: DeviceFrame,
}

/// Frames in the order they reached the device, with host timestamps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActuationTimeline {
    entries: Vec<TimelineEntry>,
}

impl ActuationTimeline {
    pub fn new() -> Self {
        Self::default()
    }

    /// # Panics
    /// If `host_time_ms` is earlier than the previous entry.
    pub fn push(&mut self, host_time_ms: f64, frame: DeviceFrame) {
        if let Some(last) = self.entries.last() {
            assert!(
                host_time_ms >= last.host_time_ms,
                "timeline times must be nondecreasing"
            );
        }
        self.entries.push(TimelineEntry {
            host_time_ms,
            frame,
        });
    }

    pub fn entries(&self) -> &[TimelineEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_events(&self) -> Vec<TimelineEvent> {
        self.entries
            .iter()
            .map(|e| TimelineEvent {
                motor: e.frame.motor,
                start_ms: e.host_time_ms,
                duration_ms: f64::from(e.frame.duration_ms),
                intensity: e.frame.intensity_fraction(),
                host_time_ms: e.host_time_ms,
            })
            .collect()
    }
}

/// Timeline entry in the pulse-train event schema plus the host timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimelineEvent {
    pub motor: Motor,
    pub start_ms: f64,
    pub duration_ms: f64,
    pub intensity: f64,
    pub host_time_ms: f64,
}
