use super::{Device, FRAME_LEN};
use std::io::{self, Write};
use std::time::Duration;

pub const BAUD_RATE: u32 = 115_200;

/// Frames written to any byte stream, normally a serial port.
pub struct SerialDevice<W: Write + Send> {
    port: W,
}

impl<W: Write + Send> SerialDevice<W> {
    pub fn new(port: W) -> Self {
        Self { port }
    }

    pub fn into_inner(self) -> W {
        self.port
    }
}

impl<W: Write + Send> Device for SerialDevice<W> {
    fn write_frame(&mut self, frame: &[u8; FRAME_LEN]) -> io::Result<()> {
        self.port.write_all(frame)?;
        self.port.flush()
    }
}

/// Opens `path` at 115200 baud, 8N1, no flow control.
pub fn open_serial(path: &str) -> io::Result<SerialDevice<Box<dyn serialport::SerialPort>>> {
    let port = serialport::new(path, BAUD_RATE)
        .data_bits(serialport::DataBits::Eight)
        .parity(serialport::Parity::None)
        .stop_bits(serialport::StopBits::One)
        .flow_control(serialport::FlowControl::None)
        .timeout(Duration::from_millis(100))
        .open()
        .map_err(io::Error::from)?;
    Ok(SerialDevice::new(port))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::serialize_frame;
    use crate::encoding::Motor;

    #[test]
    fn writes_raw_frames() {
        let mut dev = SerialDevice::new(Vec::new());
        let a = serialize_frame(Motor::Top, 200, 1.0).unwrap();
        let b = serialize_frame(Motor::Right, 1300, 1.0).unwrap();
        dev.write_frame(&a).unwrap();
        dev.write_frame(&b).unwrap();
        let bytes = dev.into_inner();
        assert_eq!(bytes.len(), 14);
        assert_eq!(&bytes[..7], &a);
        assert_eq!(&bytes[7..], &b);
    }

    #[test]
    fn missing_port_is_an_error() {
        assert!(open_serial("/nonexistent/tty-wristband").is_err());
    }
}
