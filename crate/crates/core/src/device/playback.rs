use super::{serialize_frame, ActuationTimeline, Clock, Device, DeviceFrame, FrameError};
use crate::encoding::PulseTrain;
use std::io;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlaybackError {
    #[error("device write failed at event {index} after {completed} events")]
    Transport {
        index: usize,
        completed: usize,
        #[source]
        source: io::Error,
    },
    #[error("event {index} cannot be framed: {source}")]
    Frame {
        index: usize,
        #[source]
        source: FrameError,
    },
    #[error("playback cancelled after {completed} events")]
    Cancelled { completed: usize },
}

/// Cooperative cancellation flag, checked between events.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }
}

/// Sends one frame per event at its scheduled offset from the playback start.
///
/// Durations are rounded to whole milliseconds for the wire. The returned
/// timeline is relative to the playback start. Pulses already sent are
/// never cut short; cancellation takes effect before the next one.
pub fn play(
    train: &PulseTrain,
    device: &mut dyn Device,
    clock: &dyn Clock,
    cancel: &CancelToken,
) -> Result<ActuationTimeline, PlaybackError> {
    let frames = train
        .events
        .iter()
        .enumerate()
        .map(|(index, e)| {
            serialize_frame(e.motor, e.duration_ms.round() as u64, e.intensity)
                .map_err(|source| PlaybackError::Frame { index, source })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let start = clock.now_ms();
    let mut timeline = ActuationTimeline::new();
    for (index, (event, bytes)) in train.events.iter().zip(&frames).enumerate() {
        if cancel.is_cancelled() {
            return Err(PlaybackError::Cancelled { completed: index });
        }
        clock.sleep_until_ms(start + event.start_ms);
        let sent_at = clock.now_ms() - start;
        device
            .write_frame(bytes)
            .map_err(|source| PlaybackError::Transport {
                index,
                completed: index,
                source,
            })?;
        let frame = DeviceFrame::parse(bytes).expect("frames built by serialize_frame parse");
        timeline.push(sent_at, frame);
    }
    Ok(timeline)
}

/// A playback running on its own thread. The device comes back on completion.
pub struct PlaybackHandle<D: Device + 'static> {
    cancel: CancelToken,
    join: JoinHandle<(D, Result<ActuationTimeline, PlaybackError>)>,
}

impl<D: Device + 'static> PlaybackHandle<D> {
    pub fn cancel(&self) {
        self.cancel.cancel();
    }

    pub fn is_finished(&self) -> bool {
        self.join.is_finished()
    }

    pub fn wait(self) -> (D, Result<ActuationTimeline, PlaybackError>) {
        self.join.join().expect("playback thread panicked")
    }
}

pub fn spawn_playback<D: Device + 'static>(
    train: PulseTrain,
    mut device: D,
    clock: Arc<dyn Clock>,
) -> PlaybackHandle<D> {
    let cancel = CancelToken::new();
    let token = cancel.clone();
    let join = std::thread::spawn(move || {
        let result = play(&train, &mut device, clock.as_ref(), &token);
        (device, result)
    });
    PlaybackHandle { cancel, join }
}
