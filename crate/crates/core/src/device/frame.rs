//! Seven-byte pulse frame sent to the wristband controller.
//!
//! ```text
//! +------+--------+-------+-------------+-----------+----------+
//! | 0xA5 | opcode | motor | duration LE | intensity | checksum |
//! |  1   |   1    |   1   |      2      |     1     |    1     |
//! +------+--------+-------+-------------+-----------+----------+
//! ```
//!
//! The checksum is the XOR of the six preceding bytes. The controller times
//! the pulse itself; the host only sends the start of each pulse.

use crate::encoding::Motor;
use thiserror::Error;

pub const FRAME_LEN: usize = 7;
pub const SYNC: u8 = 0xA5;
pub const OP_PULSE: u8 = 0x01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("frame must be {FRAME_LEN} bytes, got {0}")]
    Length(usize),
    #[error("bad sync byte {0:#04x}")]
    Sync(u8),
    #[error("unknown opcode {0:#04x}")]
    Opcode(u8),
    #[error("motor id {0} out of range")]
    Motor(u8),
    #[error("pulse duration must be at least 1 ms")]
    ZeroDuration,
    #[error("checksum mismatch: expected {expected:#04x}, found {found:#04x}")]
    Checksum { expected: u8, found: u8 },
    #[error("duration {0} ms does not fit the 16-bit field")]
    DurationRange(u64),
    #[error("intensity {0} outside (0, 1]")]
    IntensityRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeviceFrame {
    pub opcode: u8,
    pub motor: Motor,
    pub duration_ms: u16,
    /// PWM drive, 255 = 100%.
    pub intensity: u8,
}

pub fn checksum(bytes: &[u8]) -> u8 {
    bytes.iter().fold(0, |acc, b| acc ^ b)
}

/// Maps a drive fraction in (0, 1] to the intensity byte.
pub fn intensity_byte(intensity: f64) -> Result<u8, FrameError> {
    if !(intensity > 0.0 && intensity <= 1.0) {
        return Err(FrameError::IntensityRange(intensity));
    }
    Ok((intensity * 255.0).round() as u8)
}

impl DeviceFrame {
    pub fn pulse(motor: Motor, duration_ms: u16, intensity: u8) -> Self {
        Self {
            opcode: OP_PULSE,
            motor,
            duration_ms,
            intensity,
        }
    }

    pub fn to_bytes(&self) -> [u8; FRAME_LEN] {
        let [lo, hi] = self.duration_ms.to_le_bytes();
        let mut out = [
            SYNC,
            self.opcode,
            self.motor.id(),
            lo,
            hi,
            self.intensity,
            0,
        ];
        out[6] = checksum(&out[..6]);
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, FrameError> {
        if bytes.len() != FRAME_LEN {
            return Err(FrameError::Length(bytes.len()));
        }
        let expected = checksum(&bytes[..6]);
        if expected != bytes[6] {
            return Err(FrameError::Checksum {
                expected,
                found: bytes[6],
            });
        }
        if bytes[0] != SYNC {
            return Err(FrameError::Sync(bytes[0]));
        }
        if bytes[1] != OP_PULSE {
            return Err(FrameError::Opcode(bytes[1]));
        }
        let motor = Motor::from_id(bytes[2]).ok_or(FrameError::Motor(bytes[2]))?;
        let duration_ms = u16::from_le_bytes([bytes[3], bytes[4]]);
        if duration_ms == 0 {
            return Err(FrameError::ZeroDuration);
        }
        Ok(Self {
            opcode: bytes[1],
            motor,
            duration_ms,
            intensity: bytes[5],
        })
    }

    /// Drive fraction recovered from the intensity byte.
    pub fn intensity_fraction(&self) -> f64 {
        f64::from(self.intensity) / 255.0
    }
}

pub fn serialize_frame(
    motor: Motor,
    duration_ms: u64,
    intensity: f64,
) -> Result<[u8; FRAME_LEN], FrameError> {
    if duration_ms == 0 {
        return Err(FrameError::ZeroDuration);
    }
    let duration =
        u16::try_from(duration_ms).map_err(|_| FrameError::DurationRange(duration_ms))?;
    Ok(DeviceFrame::pulse(motor, duration, intensity_byte(intensity)?).to_bytes())
}
