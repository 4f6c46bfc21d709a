use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

/// Millisecond time source used to schedule pulses.
pub trait Clock: Send + Sync {
    fn now_ms(&self) -> f64;
    /// Blocks (or advances virtual time) until `now_ms() >= t_ms`.
    fn sleep_until_ms(&self, t_ms: f64);
}

/// Deterministic clock that only moves when told to. Clones share time.
#[derive(Debug, Clone, Default)]
pub struct VirtualClock {
    now: Arc<Mutex<f64>>,
}

impl VirtualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at_ms(t_ms: f64) -> Self {
        Self {
            now: Arc::new(Mutex::new(t_ms)),
        }
    }

    pub fn advance_by_ms(&self, delta_ms: f64) {
        assert!(delta_ms >= 0.0, "virtual time cannot run backwards");
        *self.now.lock().unwrap() += delta_ms;
    }
}

impl Clock for VirtualClock {
    fn now_ms(&self) -> f64 {
        *self.now.lock().unwrap()
    }

    fn sleep_until_ms(&self, t_ms: f64) {
        let mut now = self.now.lock().unwrap();
        if t_ms > *now {
            *now = t_ms;
        }
    }
}

/// Wall-clock time since construction, from the monotonic `Instant`.
#[derive(Debug, Clone, Copy)]
pub struct MonotonicClock {
    origin: Instant,
}

impl MonotonicClock {
    pub fn new() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for MonotonicClock {
    fn now_ms(&self) -> f64 {
        self.origin.elapsed().as_secs_f64() * 1000.0
    }

    fn sleep_until_ms(&self, t_ms: f64) {
        // coarse sleep, then yield through the last millisecond
        loop {
            let remaining = t_ms - self.now_ms();
            if remaining <= 0.0 {
                return;
            }
            if remaining > 2.0 {
                std::thread::sleep(Duration::from_secs_f64((remaining - 1.0) / 1000.0));
            } else {
                std::thread::yield_now();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn virtual_clock_is_shared_and_monotone() {
        let c = VirtualClock::new();
        let other = c.clone();
        c.sleep_until_ms(120.0);
        assert_eq!(other.now_ms(), 120.0);
        c.sleep_until_ms(50.0);
        assert_eq!(c.now_ms(), 120.0);
        other.advance_by_ms(40.0);
        assert_eq!(c.now_ms(), 160.0);
        assert_eq!(VirtualClock::starting_at_ms(7.0).now_ms(), 7.0);
    }

    #[test]
    fn monotonic_clock_sleeps_at_least_until_target() {
        let c = MonotonicClock::new();
        let target = c.now_ms() + 15.0;
        c.sleep_until_ms(target);
        assert!(c.now_ms() >= target);
    }
}
