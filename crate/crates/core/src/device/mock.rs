use super::{ActuationTimeline, Clock, Device, DeviceFrame, FRAME_LEN};
use std::io;
use std::sync::{Arc, Mutex};

/// In-memory device that timestamps each frame with its clock.
///
/// Clones share the same timeline, so a test can keep one handle while the
/// other is moved into a playback.
#[derive(Clone)]
pub struct MockDevice {
    clock: Arc<dyn Clock>,
    timeline: Arc<Mutex<ActuationTimeline>>,
    writes: Arc<Mutex<usize>>,
    fail_at: Option<usize>,
}

pub fn mock_device(clock: Arc<dyn Clock>) -> MockDevice {
    MockDevice {
        clock,
        timeline: Arc::default(),
        writes: Arc::default(),
        fail_at: None,
    }
}

impl MockDevice {
    /// Makes the write with 0-based index `index` fail with a broken pipe.
    pub fn failing_at(mut self, index: usize) -> Self {
        self.fail_at = Some(index);
        self
    }

    pub fn timeline(&self) -> ActuationTimeline {
        self.timeline.lock().unwrap().clone()
    }

    pub fn timeline_json(&self) -> serde_json::Value {
        serde_json::to_value(self.timeline().to_events()).expect("timeline events serialise")
    }

    pub fn clear(&self) {
        *self.timeline.lock().unwrap() = ActuationTimeline::new();
    }
}

impl Device for MockDevice {
    fn write_frame(&mut self, bytes: &[u8; FRAME_LEN]) -> io::Result<()> {
        let mut writes = self.writes.lock().unwrap();
        let index = *writes;
        *writes += 1;
        if self.fail_at == Some(index) {
            return Err(io::Error::new(
                io::ErrorKind::BrokenPipe,
                format!("injected failure at write {index}"),
            ));
        }
        let frame =
            DeviceFrame::parse(bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        self.timeline
            .lock()
            .unwrap()
            .push(self.clock.now_ms(), frame);
        Ok(())
    }
}
