//! The kernel's logical clock. Time is a value the rest of the system can
//! observe: an integer tick count plus a quantum in microseconds. Real-time
//! pacing only aligns tick boundaries with the wall clock; it never changes
//! what a run emits.

use std::time::{Duration, Instant};

use super::KernelError;

pub const DEFAULT_TICK_QUANTUM_US: u32 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacingMode {
    /// Run the tick loop as fast as the host allows.
    Fast,
    /// Sleep so that tick t begins no earlier than start + t·quantum.
    Realtime,
}

#[derive(Debug)]
pub struct TickClock {
    current_tick: u64,
    tick_quantum_us: u32,
    pacing: PacingMode,
    epoch: Option<Instant>,
}

impl TickClock {
    pub fn new(tick_quantum_us: u32, pacing: PacingMode) -> Result<Self, KernelError> {
        if tick_quantum_us < 1 {
            return Err(KernelError::InvalidQuantum);
        }
        Ok(Self {
            current_tick: 0,
            tick_quantum_us,
            pacing,
            epoch: None,
        })
    }

    pub fn current_tick(&self) -> u64 {
        self.current_tick
    }

    pub fn tick_quantum_us(&self) -> u32 {
        self.tick_quantum_us
    }

    pub fn pacing(&self) -> PacingMode {
        self.pacing
    }

    pub fn tick_to_seconds(&self, tick: u64) -> f64 {
        tick as f64 * self.tick_quantum_us as f64 / 1e6
    }

    /// Block until the wall clock reaches the boundary of `current_tick`.
    /// No-op in fast mode. The epoch is pinned on the first call.
    pub(crate) fn pace(&mut self) {
        if self.pacing == PacingMode::Fast {
            return;
        }
        let epoch = *self.epoch.get_or_insert_with(Instant::now);
        let target = epoch + Duration::from_micros(self.current_tick * self.tick_quantum_us as u64);
        let now = Instant::now();
        if target > now {
            std::thread::sleep(target - now);
        }
    }

    /// Advance by exactly one tick.
    pub(crate) fn advance(&mut self) {
        self.current_tick += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantum_must_be_positive() {
        assert_eq!(TickClock::new(0, PacingMode::Fast).unwrap_err(), KernelError::InvalidQuantum);
        assert!(TickClock::new(1, PacingMode::Fast).is_ok());
    }

    #[test]
    fn ticks_advance_by_one() {
        let mut clock = TickClock::new(1_000, PacingMode::Fast).unwrap();
        assert_eq!(clock.current_tick(), 0);
        clock.advance();
        clock.advance();
        assert_eq!(clock.current_tick(), 2);
    }

    #[test]
    fn tick_to_seconds_uses_the_quantum() {
        let clock = TickClock::new(1_000, PacingMode::Fast).unwrap();
        assert_eq!(clock.tick_to_seconds(500), 0.5);
        let clock = TickClock::new(250, PacingMode::Fast).unwrap();
        assert_eq!(clock.tick_to_seconds(4_000), 1.0);
    }

    #[test]
    fn realtime_pacing_sleeps_to_the_boundary() {
        let mut clock = TickClock::new(10_000, PacingMode::Realtime).unwrap();
        let start = Instant::now();
        for _ in 0..5 {
            clock.pace();
            clock.advance();
        }
        // Five 10 ms ticks: at least 40 ms must have elapsed (tick 0 starts at 0).
        assert!(start.elapsed() >= Duration::from_millis(40));
    }
}
